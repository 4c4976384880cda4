"""Integer certificates from projections and the integrality of ``theta(hbar)``.

For a projection ``e`` in 2x2 matrices over a unital algebra, bounds
``alpha <= tr(e) - 1 <= beta`` either straddle 0 or pin down an integer
``k`` with ``alpha <= 1/k <= beta``.  Over a scan of ``hbar`` values these
integers are summarized by a Laurent polynomial ``theta = 2/hbar + c0 +
c1 hbar + ...`` which must sit near an integer at every allowed ``hbar``.
"""
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import PreconditionError, check_hermitian, check_same_shape
from .linalg import as_block2, eigh, operator_norm, partial_trace
from .projections import (
    bott_projection,
    grading,
    idempotency_residual,
    projection_of,
    purify_spectral,
    quantize_block,
    squash_correct,
    unitalize,
)
from .toeplitz import PerturbedMap, ScanGrid, toeplitz_op


def spectrum_sum_margin(a, b):
    """``min_{lam in Spec(a+b)} (||b|| - dist(lam, Spec a))``; never negative in exact arithmetic."""
    a, b = check_hermitian(a, "a"), check_hermitian(b, "b")
    check_same_shape(a, b)
    spec_a = eigh(a).eigenvalues
    spec_sum = eigh(a + b).eigenvalues
    dist = np.min(np.abs(spec_sum[:, None] - spec_a[None, :]), axis=1)
    return float(operator_norm(b) - np.max(dist))


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """``e = [[Z, X], [X^H, 1 - W]]``."""

    Z: np.ndarray
    X: np.ndarray
    W: np.ndarray

    @property
    def relation_residuals(self):
        Z, X, W = self.Z, self.X, self.W
        one = np.eye(Z.shape[0])
        return {
            "z_selfadjoint": operator_norm(Z - Z.conj().T),
            "w_selfadjoint": operator_norm(W - W.conj().T),
            "intertwine": operator_norm(Z @ X - X @ W),
            "z_relation": operator_norm(Z @ (one - Z) - X @ X.conj().T),
            "w_relation": operator_norm(W @ (one - W) - X.conj().T @ X),
        }

    def max_residual(self):
        return max(self.relation_residuals.values())


def block_decompose(e, unit=None):
    E = as_block2(e)
    one = np.eye(E.dim) if unit is None else unit
    return BlockDecomposition(E.a, E.b, one - E.d)


def _hermitian_spectrum(A):
    return eigh((A + A.conj().T) / 2).eigenvalues


def spec_union_margin(d):
    """Hausdorff distance between ``Spec Z + {0, 1}`` and ``Spec W + {0, 1}``."""
    sz = np.concatenate([_hermitian_spectrum(d.Z), [0.0, 1.0]])
    sw = np.concatenate([_hermitian_spectrum(d.W), [0.0, 1.0]])
    gap = np.abs(sz[:, None] - sw[None, :])
    return float(max(gap.min(axis=1).max(), gap.min(axis=0).max()))


def trace_bounds(e, unit=None):
    """Extreme eigenvalues of ``tr(e) - 1``."""
    E = as_block2(e)
    one = np.eye(E.dim) if unit is None else unit
    w = _hermitian_spectrum(partial_trace(E) - one)
    return float(w[0]), float(w[-1])


@dataclass
class IntegerCertificate:
    """Outcome of integer extraction from trace bounds.

    ``status`` is one of ``"unique"``, ``"multiple"``, ``"inconclusive"`` (the
    bounds straddle 0) or ``"violation"`` (no integer fits; impossible for a
    genuine projection, so it flags upstream numerical failure).
    """

    alpha: float
    beta: float
    k_candidates: list
    status: str
    slack: float = 0.0
    relation_residuals: dict = field(default_factory=dict)
    spec_union_margin: float = float("nan")

    @property
    def unique(self):
        return self.status == "unique"

    @property
    def k(self):
        return self.k_candidates[0] if self.unique else None


def extract_integer(alpha, beta, slack=1e-12, max_candidates=10**6):
    """Integers ``k`` with ``alpha <= 1/k <= beta``, bounds widened by ``slack``."""
    alpha, beta = float(alpha), float(beta)
    if alpha > beta:
        raise PreconditionError(f"need alpha <= beta, got {alpha} > {beta}")
    lo, hi = alpha - slack, beta + slack
    if lo <= 0 <= hi:
        return IntegerCertificate(alpha, beta, [], "inconclusive", slack)
    sign = 1 if lo > 0 else -1
    small, large = sorted((abs(lo), abs(hi)))
    # 1/|k| lies in [small, large]; the window is padded by one and then filtered
    kmin = max(1, int(np.floor(1 / large)) - 1)
    kmax = min(int(np.ceil(1 / small)) + 1, kmin + max_candidates)
    ks = [sign * k for k in range(kmin, kmax + 1) if lo <= sign / k <= hi]
    if not ks:
        status = "violation"
    else:
        status = "unique" if len(ks) == 1 else "multiple"
    return IntegerCertificate(alpha, beta, ks, status, slack)


def certify_projection(e, unit=None, slack=1e-12):
    """Bounds, integer extraction and block relations for one projection."""
    alpha, beta = trace_bounds(e, unit)
    cert = extract_integer(alpha, beta, slack)
    d = block_decompose(e, unit)
    cert.relation_residuals = d.relation_residuals
    cert.spec_union_margin = spec_union_margin(d)
    return cert


@dataclass(frozen=True)
class LaurentPolynomial:
    """``theta(hbar) = leading/hbar + sum_j tail[j] hbar^j``."""

    tail: tuple
    residual: float = 0.0
    leading: float = 2.0

    def __call__(self, hbar):
        hbar = np.asarray(hbar, dtype=float)
        return self.leading / hbar + np.polynomial.polynomial.polyval(hbar, self.tail)

    @property
    def c0(self):
        return self.tail[0]

    def shifted(self, m):
        return LaurentPolynomial((self.tail[0] + m,) + tuple(self.tail[1:]), self.residual, self.leading)


def _sample_weights(widths, n):
    if widths is None:
        return np.ones(n)
    widths = np.asarray(widths, float)
    floor = max(float(np.max(widths)) * 1e-6, 1e-15)
    return 1.0 / (widths + floor)


def fit_theta(hbar, tau, degree=2, widths=None, constrain_leading=True):
    """Least-squares Laurent fit of ``1/tau`` with ``hbar^-1`` coefficient fixed at 2.

    ``widths`` (trace-bound widths ``beta - alpha``) down-weight loose samples.
    With ``constrain_leading=False`` the ``hbar^-1`` coefficient is fitted too,
    which is only a diagnostic.
    """
    hbar, tau = np.asarray(hbar, float), np.asarray(tau, float)
    if hbar.shape != tau.shape or hbar.ndim != 1:
        raise PreconditionError("hbar and tau must be matching 1-D arrays")
    n_params = degree + 1 + (0 if constrain_leading else 1)
    if np.unique(hbar).size < n_params + (1 if constrain_leading else 0):
        raise PreconditionError(
            f"singular fit: {np.unique(hbar).size} distinct hbar values for degree {degree}"
        )
    target = 1.0 / tau
    cols = [hbar**j for j in range(degree + 1)]
    if constrain_leading:
        target = target - 2.0 / hbar
    else:
        cols = [1.0 / hbar] + cols
    V = np.stack(cols, axis=1)
    sw = np.sqrt(_sample_weights(widths, hbar.size))
    sol, *_ = np.linalg.lstsq(V * sw[:, None], target * sw, rcond=None)
    residual = float(np.max(np.abs(V @ sol - target)))
    if constrain_leading:
        return LaurentPolynomial(tuple(sol), residual)
    return LaurentPolynomial(tuple(sol[1:]), residual, leading=float(sol[0]))


class LaurentThetaRegressor(RegressorMixin, BaseEstimator):
    """Fit ``tau(hbar) = 1/theta(hbar)`` with ``theta = 2/hbar + polynomial``.

    ``predict`` returns ``tau``; :meth:`theta` returns the Laurent polynomial's
    values.

    Parameters
    ----------
    degree : int
        Degree of the polynomial tail.
    """

    def __init__(self, degree=2):
        self.degree = degree

    def fit(self, X, y, sample_weight=None):
        hbar = np.asarray(X, float).reshape(-1)
        widths = None if sample_weight is None else 1.0 / np.asarray(sample_weight, float)
        self.theta_ = fit_theta(hbar, y, self.degree, widths)
        self.coef_ = np.array(self.theta_.tail)
        self.diagnostic_ = fit_theta(hbar, y, self.degree, widths, constrain_leading=False)
        return self

    def predict(self, X):
        check_is_fitted(self, "theta_")
        return 1.0 / self.theta(X)

    def theta(self, X):
        check_is_fitted(self, "theta_")
        return self.theta_(np.asarray(X, float).reshape(-1))

    def integer_distances(self, X):
        return integer_distance_scan(self.theta_, np.asarray(X, float).reshape(-1))


def integer_distance_scan(theta, hbars):
    values = theta(np.asarray(hbars, float))
    return np.abs(values - np.round(values))


def excluded_points(c, ks):
    """Forbidden ``hbar = 2/(k - c + 1/2)``, where ``2/hbar + c`` is a half-integer."""
    ks = np.asarray(list(ks), dtype=float)
    denom = ks - c + 0.5
    if np.any(denom <= 0):
        raise PreconditionError("every k must satisfy k - c + 1/2 > 0")
    return 2.0 / denom


def allowed_points(c, ks):
    """``hbar`` where ``2/hbar + c`` equals the integer ``k``, for ``k > c``."""
    ks = np.asarray([k for k in ks if k - c > 0], dtype=float)
    return 2.0 / (ks - c)


def interleaves(a, b):
    """Whether the merged, sorted points alternate strictly between ``a`` and ``b``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if np.intersect1d(a, b).size:
        return False
    labels = np.concatenate([np.zeros(a.size), np.ones(b.size)])[np.argsort(np.concatenate([a, b]))]
    return bool(np.all(np.diff(labels) != 0))


@dataclass
class PipelineStep:
    N: int
    hbar: float
    certificate: IntegerCertificate
    idempotency: float
    spreads: list = field(default_factory=list)

    @property
    def tau(self):
        return (self.certificate.alpha + self.certificate.beta) / 2

    @property
    def width(self):
        return self.certificate.beta - self.certificate.alpha


@dataclass
class PipelineResult:
    steps: list
    theta: LaurentPolynomial
    theta_diagnostic: LaurentPolynomial
    distances: np.ndarray

    @property
    def N0(self):
        """Smallest scanned ``N`` from which every certificate is unique with ``k = N + 1``."""
        N0 = None
        for step in reversed(self.steps):
            cert = step.certificate
            if not (cert.unique and cert.k == step.N + 1):
                break
            N0 = step.N
        return N0


def certify_step(cfg, eps=0.0, seed=0, squash_rounds=2, L_out=4, slack=1e-12):
    """Quantize, purify, squash and certify the Bott projection at one level."""
    if eps:
        qmap, unit = unitalize(PerturbedMap(cfg, eps, seed))
    else:
        qmap, unit = partial(toeplitz_op, cfg), None
    A = quantize_block(cfg, bott_projection(), qmap)
    u = grading(purify_spectral(A))
    spreads = []
    for _ in range(squash_rounds):
        u, report = squash_correct(cfg, u, L_out, unit)
        spreads.append((report.spread_before, report.spread_after))
    e = projection_of(u)
    cert = certify_projection(e, unit, slack)
    return PipelineStep(cfg.N, cfg.hbar, cert, idempotency_residual(e), spreads)


def fit_steps(steps, degree=2):
    """Fit ``theta`` to certified steps; returns ``(theta, diagnostic, distances)``."""
    hbar = np.array([s.hbar for s in steps])
    tau = np.array([s.tau for s in steps])
    widths = np.array([s.width for s in steps])
    degree = min(degree, max(len(steps) - 2, 0))
    theta = fit_theta(hbar, tau, degree, widths)
    diagnostic = None
    if len(steps) >= 3:
        diag_degree = min(degree, len(steps) - 3)
        diagnostic = fit_theta(hbar, tau, diag_degree, widths, constrain_leading=False)
    return theta, diagnostic, integer_distance_scan(theta, hbar)


def certify_pipeline(scan, eps=0.0, seed=0, squash_rounds=2, L_out=4, degree=2, slack=1e-12):
    """Run :func:`certify_step` over ``scan`` and fit ``theta`` to the results."""
    if not isinstance(scan, ScanGrid):
        scan = ScanGrid(tuple(scan), max(L_out, 1))
    steps = [certify_step(cfg, eps, seed, squash_rounds, L_out, slack) for cfg in scan]
    return PipelineResult(steps, *fit_steps(steps, degree))
