"""Projections over the quantized sphere.

The pipeline quantizes the Bott projection entrywise, purifies the result
to an exact projection, optionally unitalizes a non-unital quantization map
first, and flattens the partial trace with squash corrections.
"""
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import PreconditionError, SpectrumTooWideError, check_hermitian
from .linalg import (
    Block2Matrix,
    Step,
    as_dense,
    eigh,
    inverse_sqrt,
    lift,
    operator_norm,
    partial_trace,
    pauli_kron,
    spectral_function,
)
from .sphere import (
    SphereFunction,
    constant,
    coordinates,
    integrate_mean,
    poisson_solve,
    synthesize,
)
from .toeplitz import dequantize, toeplitz_op


@dataclass(frozen=True)
class ClassicalBlock2:
    """2x2 matrix of sphere functions, ``entries[row][col]``."""

    entries: tuple

    def adjoint(self):
        (a, b), (c, d) = self.entries
        return ClassicalBlock2(((a.conj(), c.conj()), (b.conj(), d.conj())))

    def evaluate(self, grid):
        """Values with shape ``(2, 2) + grid.shape``."""
        return np.array([[synthesize(f, grid).values for f in row] for row in self.entries])


def bott_projection():
    """``(1 + sigma_i x^i) / 2`` as a matrix of functions."""
    x1, x2, x3 = coordinates()
    half = constant(0.5)
    return ClassicalBlock2(
        (
            (half + x3 * 0.5, (x1 - x2 * 1j) * 0.5),
            ((x1 + x2 * 1j) * 0.5, half - x3 * 0.5),
        )
    )


def quantize_block(cfg, E, qmap=None):
    """Apply a quantization map (default: Toeplitz at ``cfg``) entrywise."""
    qmap = partial(toeplitz_op, cfg) if qmap is None else qmap
    (a, b), (c, d) = E.entries
    return Block2Matrix(qmap(a), qmap(b), qmap(c), qmap(d))


def equivariant_projection(N):
    """``(N+2)/(2(N+1)) + sigma_i J^i / (N+1)`` from the spin-N/2 generators."""
    from .spin import build_spin

    J = build_spin(N)
    dense = (N + 2) / (2 * (N + 1)) * np.eye(2 * (N + 1)) + pauli_kron(tuple(J)) / (N + 1)
    return Block2Matrix.from_dense(dense)


def idempotency_residual(A):
    A = as_dense(A)
    return operator_norm(A - A @ A)


def _like(template, dense):
    return Block2Matrix.from_dense(dense) if isinstance(template, Block2Matrix) else dense


def _check_purifiable(A):
    A = check_hermitian(as_dense(A))
    residual = idempotency_residual(A)
    if not residual < 0.25:
        raise SpectrumTooWideError(residual)
    return A


def purify_spectral(A, gap_tol=1e-8):
    """Spectral projection onto eigenvalues above 1/2."""
    dense = _check_purifiable(A)
    return _like(A, spectral_function(dense, Step(0.5), gap_tol=gap_tol))


@dataclass
class PurifyReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)

    @property
    def final_residual(self):
        return self.residual_history[-1]

    @property
    def ratios(self):
        """``r_j / r_{j-1}^2`` for consecutive recorded residuals."""
        r = self.residual_history
        return [b / a**2 for a, b in zip(r, r[1:]) if a > 0]


class PurificationError(RuntimeError):
    pass


def purify_iterate(A, tol=1e-12, max_iter=60):
    """Purify by iterating ``e -> 3e^2 - 2e^3`` until ``||e - e^2|| < tol``.

    Returns ``(projection, PurifyReport)``.
    """
    e = _check_purifiable(A)
    report = PurifyReport(residual_history=[idempotency_residual(e)])
    while report.final_residual >= tol:
        if report.iterations >= max_iter:
            raise PurificationError(
                f"no convergence in {max_iter} iterations, residual {report.final_residual:.3g}"
            )
        e2 = e @ e
        e = 3 * e2 - 2 * e2 @ e
        e = (e + e.conj().T) / 2
        report.iterations += 1
        report.residual_history.append(idempotency_residual(e))
    return _like(A, e), report


class Purifier(TransformerMixin, BaseEstimator):
    """Map near-projections to projections.

    Parameters
    ----------
    method : {"spectral", "iterate"}
    tol : float
        Stopping residual for ``method="iterate"``.
    """

    def __init__(self, method="spectral", tol=1e-12):
        self.method = method
        self.tol = tol

    def fit(self, X=None, y=None):
        if self.method not in ("spectral", "iterate"):
            raise ValueError(f"unknown method {self.method!r}")
        self.reports_ = []
        return self

    def transform(self, X):
        if isinstance(X, (Block2Matrix, np.ndarray)) and np.ndim(as_dense(X)) == 2:
            return self._one(X)
        return [self._one(A) for A in X]

    def _one(self, A):
        if self.method == "spectral":
            return purify_spectral(A)
        e, report = purify_iterate(A, tol=self.tol)
        self.reports_.append(report)
        return e


class CornerTooSmallError(PreconditionError):
    """``e Q(1) e`` is not invertible on the corner; hbar is too large."""


class UnitalMap:
    """``a -> V^(-1/2) Q(a) V^(-1/2)`` with ``V = e Q(1) e`` on the corner ``e A e``."""

    def __init__(self, qmap, unit, one_image):
        self.qmap = qmap
        self.unit = unit
        spec = eigh(unit)
        U = spec.eigenvectors[:, spec.eigenvalues > 0.5]
        Vc = U.conj().T @ one_image @ U
        if Vc.size and operator_norm(Vc - np.eye(Vc.shape[0])) >= 1:
            raise CornerTooSmallError("||V - e|| >= 1 on the corner")
        self.corner_basis = U
        self.scale = U @ inverse_sqrt(Vc) @ U.conj().T if Vc.size else np.zeros_like(unit)

    def __call__(self, f):
        return self.scale @ self.qmap(f) @ self.scale


def unitalize(qmap):
    """Correct a quantization map so that it sends 1 to a projection.

    Returns ``(corrected_map, e)`` where ``e`` purifies ``qmap(1)``.
    """
    one_image = qmap(constant(1.0))
    e = purify_spectral(one_image)
    return UnitalMap(qmap, e, one_image), e


def grading_decompose(u):
    """Pauli components ``(tau, x1, x2, x3)`` of ``u = tau + sigma_i x^i``."""
    u = u if isinstance(u, Block2Matrix) else Block2Matrix.from_dense(u)
    return (
        (u.a + u.d) / 2,
        (u.b + u.c) / 2,
        1j * (u.b - u.c) / 2,
        (u.a - u.d) / 2,
    )


def grading(e):
    """``2e - 1`` for a projection ``e``."""
    dense = as_dense(e)
    return _like(e, 2 * dense - np.eye(dense.shape[0]))


def projection_of(u):
    dense = as_dense(u)
    return _like(u, (dense + np.eye(dense.shape[0])) / 2)


def squash_step(u, Qf, tol=1e-10):
    """``(1 + d^2)^(-1/2) (u + d)`` with ``d = X - uXu`` and ``X = 1 (x) Qf``."""
    U = check_hermitian(as_dense(u), "u")
    eye = np.eye(U.shape[0])
    if operator_norm(U @ U - eye) > tol:
        raise PreconditionError("u must square to the identity")
    X = lift(Qf)
    delta = X - U @ X @ U
    delta = (delta + delta.conj().T) / 2
    new = inverse_sqrt(eye + delta @ delta) @ (U + delta)
    return _like(u, (new + new.conj().T) / 2)


def spectral_width(A):
    w = eigh(A).eigenvalues
    return float(w[-1] - w[0])


@dataclass(frozen=True)
class SquashReport:
    hbar: float
    spread_before: float
    spread_after: float
    f: SphereFunction
    c: float


def squash_correct(cfg, u, L_out, unit=None, flat_tol=1e-12):
    """One flattening step for the partial trace of the projection ``(1 + u)/2``.

    Reads ``g`` from ``tr e - 1 = hbar/2 + hbar^2 g + ...``, solves
    ``laplacian(f) = -2 (g - mean g)`` and applies :func:`squash_step` with
    ``T(f)``.  A partial trace already scalar to ``flat_tol`` is left alone.
    """
    one = np.eye(cfg.dim) if unit is None else unit
    tau = partial_trace(projection_of(u)) - one
    spread = spectral_width(tau)
    if spread <= flat_tol:
        c = float(np.real(np.trace(tau))) / cfg.dim
        c = (c - cfg.hbar / 2) / cfg.hbar**2
        return u, SquashReport(cfg.hbar, spread, spread, constant(0.0), c)
    G = (tau - cfg.hbar / 2 * one) / cfg.hbar**2
    g = dequantize(cfg, (G + G.conj().T) / 2, L_out).real_part()
    c = integrate_mean(g).real
    f = poisson_solve(-2.0 * (g - c))
    new = squash_step(u, toeplitz_op(cfg, f))
    tau_new = partial_trace(projection_of(new)) - one
    report = SquashReport(cfg.hbar, spectral_width(tau), spectral_width(tau_new), f, c)
    return new, report
