"""Berezin-Toeplitz quantization of the sphere and its asymptotic diagnostics.

``T_N(f)`` compresses multiplication by ``f`` onto the ``N + 1`` dimensional
space of holomorphic sections; with ``hbar = 2/N`` it sends the coordinate
functions to ``2/(N+2) J^i``.  Matrix elements are computed by quadrature on
a grid sized so that every integrand is a polynomial the rule integrates
exactly.
"""
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import AliasingError, PreconditionError, as_matrix, check_nonneg_int
from .linalg import commutator, operator_norm
from .sphere import (
    GridField,
    SphereFunction,
    analyze,
    azimuthal_modes,
    gauss_legendre,
    grid_of,
    n_coeffs,
    poisson_bracket,
    truncate,
)
from .spin import build_frame, build_spin


@dataclass(frozen=True)
class QuantizationConfig:
    """Everything needed to quantize band ``<= band`` functions at level ``N``."""

    N: int
    band: int = 4

    def __post_init__(self):
        check_nonneg_int(self.N, "N")
        check_nonneg_int(self.band, "band")

    @property
    def hbar(self):
        return 2.0 / self.N if self.N else np.inf

    @property
    def dim(self):
        return self.N + 1

    @cached_property
    def grid(self):
        return grid_of(self.N + self.band + 8, 2 * self.N + self.band + 1)

    @cached_property
    def frame(self):
        return build_frame(self.N, self.grid)

    @cached_property
    def spin(self):
        return build_spin(self.N)


@lru_cache(maxsize=256)
def get_config(N, band=4):
    return QuantizationConfig(int(N), int(band))


@dataclass(frozen=True)
class ScanGrid:
    """Increasing levels ``N`` (decreasing ``hbar``) sharing one band limit."""

    Ns: tuple
    band: int = 4
    configs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        Ns = tuple(int(n) for n in self.Ns)
        if not Ns:
            raise PreconditionError("scan needs at least one N")
        if Ns[0] < 1 or any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise PreconditionError(f"N values must be strictly increasing and >= 1, got {Ns}")
        object.__setattr__(self, "Ns", Ns)
        object.__setattr__(self, "configs", tuple(get_config(n, self.band) for n in Ns))

    @property
    def hbars(self):
        return np.array([c.hbar for c in self.configs])

    def __len__(self):
        return len(self.Ns)

    def __iter__(self):
        return iter(self.configs)


def fit_band(f, L, tol=1e-12):
    """Return ``f`` at band ``L``, refusing to drop non-negligible coefficients."""
    if f.band <= L:
        return f
    tail = f.coeffs[n_coeffs(L):]
    if np.max(np.abs(tail)) > tol * max(1.0, float(np.max(np.abs(f.coeffs)))):
        raise AliasingError(f"function of band {f.band} exceeds the configured band {L}")
    return truncate(f, L)


def toeplitz_op(cfg, f):
    """Matrix of ``T_N(f)``; ``T_N(1)`` is the identity.

    The azimuthal integral is done exactly per Fourier mode, so entry
    ``(k, k + m)`` only sees mode ``m`` of ``f``; the ``theta`` sums run in
    extended precision.
    """
    f = fit_band(f, cfg.band)
    L, N = f.band, cfg.N
    F = azimuthal_modes(f, cfg.grid).astype(np.clongdouble)
    a = cfg.frame.profiles
    w = gauss_legendre(cfg.grid.n_theta)[1] * np.longdouble(N + 1) / 2
    T = np.zeros((N + 1, N + 1), dtype=np.clongdouble)
    for m in range(-min(L, N), min(L, N) + 1):
        k = np.arange(max(0, -m), min(N, N - m) + 1)
        T[k, k + m] = (a[k] * a[k + m]) @ (w * F[m + L])
    return T.astype(complex)


def berezin_symbol(cfg, A):
    """Covariant symbol ``<z|A|z>`` at every node of the config's grid."""
    A = as_matrix(A)
    if A.shape[0] != cfg.dim:
        raise PreconditionError(f"matrix has dim {A.shape[0]}, expected {cfg.dim}")
    S = cfg.frame.sections
    values = np.sum(S * (A @ S.conj()), axis=0)
    return GridField(cfg.grid, values.reshape(cfg.grid.shape), cfg.N)


def dequantize(cfg, A, L):
    """Band ``L`` projection of the Berezin symbol of ``A``."""
    return analyze(berezin_symbol(cfg, A), L)


def dirac_residual(cfg, f, g):
    """``||[T f, T g] - i hbar T({f, g})||``."""
    Tf, Tg = toeplitz_op(cfg, f), toeplitz_op(cfg, g)
    return operator_norm(commutator(Tf, Tg) - 1j * cfg.hbar * toeplitz_op(cfg, poisson_bracket(f, g)))


def order_residual(cfg, f, g, star_terms=()):
    """``||T f T g - T(fg + sum_j (i hbar)^j C_j)||`` for ``star_terms = [C_1, ..]``."""
    target = f * g
    for j, C in enumerate(star_terms, start=1):
        target = target + C * (1j * cfg.hbar) ** j
    return operator_norm(toeplitz_op(cfg, f) @ toeplitz_op(cfg, g) - toeplitz_op(cfg, target))


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.size < 2:
        raise PreconditionError("slope needs at least two points")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


class ExtrapolationWarning(UserWarning):
    pass


def estimate_c1(scan, f, g, L_out, *, return_residual=False, warn_above=1e-3):
    """First-order star product coefficient ``C_1(f, g)`` by extrapolation in ``hbar``.

    The band ``L_out`` symbol of ``(T f T g - T(fg)) / (i hbar)`` is fitted by a
    quadratic in ``hbar`` over the last four scan points and evaluated at 0.
    """
    if len(scan) < 3:
        raise PreconditionError("C_1 extrapolation needs at least 3 scan points")
    cfgs = scan.configs[-4:]
    fg = f * g
    rows = []
    for cfg in cfgs:
        B = (toeplitz_op(cfg, f) @ toeplitz_op(cfg, g) - toeplitz_op(cfg, fg)) / (1j * cfg.hbar)
        rows.append(dequantize(cfg, B, L_out).coeffs)
    h = np.array([c.hbar for c in cfgs])
    V = np.vander(h, 3, increasing=True)
    sol, *_ = np.linalg.lstsq(V, np.array(rows), rcond=None)
    residual = float(np.max(np.abs(V @ sol - np.array(rows)))) if len(cfgs) > 3 else 0.0
    if residual > warn_above:
        warnings.warn(f"C_1 extrapolation residual {residual:.3g}", ExtrapolationWarning)
    c1 = SphereFunction(sol[0])
    return (c1, residual) if return_residual else c1


def random_hermitian(dim, rng):
    """Random Hermitian matrix of unit operator norm."""
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = (Z + Z.conj().T) / 2
    return H / np.linalg.norm(H, 2)


def perturbation_matrix(N, seed):
    return random_hermitian(N + 1, np.random.default_rng([int(seed), int(N)]))


class PerturbedMap:
    """``f -> T f + eps hbar^2 (R T f + T f R) / 2`` for a seeded unit-norm ``R``.

    Star-linear and positivity preserving to leading order, but not unital.
    """

    def __init__(self, cfg, eps=0.05, seed=0):
        self.cfg = cfg
        self.eps = float(eps)
        self.seed = seed
        self.R = perturbation_matrix(cfg.N, seed)

    def __call__(self, f):
        T = toeplitz_op(self.cfg, f)
        if self.eps == 0:
            return T
        P = self.eps * self.cfg.hbar ** 2 * self.R
        return T + (P @ T + T @ P) / 2


class ToeplitzQuantizer(TransformerMixin, BaseEstimator):
    """Berezin-Toeplitz quantization as a transformer.

    ``transform`` maps rows of harmonic coefficients to ``(N+1, N+1)``
    matrices; ``inverse_transform`` maps matrices back to the band ``band``
    coefficients of their Berezin symbols.

    Parameters
    ----------
    N : int
        Level; the matrices act on ``N + 1`` dimensions and ``hbar = 2/N``.
    band : int
        Largest harmonic degree accepted by ``transform``.
    """

    def __init__(self, N=8, band=4):
        self.N = N
        self.band = band

    def fit(self, X=None, y=None):
        self.config_ = get_config(self.N, self.band)
        self.hbar_ = self.config_.hbar
        return self

    def _as_functions(self, X):
        if isinstance(X, SphereFunction):
            return [X]
        if len(X) and isinstance(X[0], SphereFunction):
            return list(X)
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        return [SphereFunction(row) for row in X]

    def transform(self, X):
        check_is_fitted(self, "config_")
        return np.stack([toeplitz_op(self.config_, f) for f in self._as_functions(X)])

    def inverse_transform(self, X):
        check_is_fitted(self, "config_")
        mats = np.asarray(X, dtype=complex)
        if mats.ndim == 2:
            mats = mats[None]
        return np.stack([dequantize(self.config_, A, self.band).coeffs for A in mats])
