"""Band-limited functions on the unit sphere.

A :class:`SphereFunction` stores coefficients ``c[l, m]`` in the orthonormal
complex spherical-harmonic basis with the Condon-Shortley phase (scipy's
``sph_harm_y`` convention), flattened with index ``l*l + l + m``.  A function
is real-valued iff ``c[l, -m] == (-1)**m * conj(c[l, m])``.

Grid work uses a Gauss-Legendre rule in ``u = cos(theta)`` times a uniform
azimuthal rule.  Neither touches the poles.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import sph_harm_y

from ._validation import AliasingError, MeanNotZeroError, PreconditionError, check_nonneg_int

FOUR_PI = 4.0 * np.pi


def n_coeffs(L):
    return (L + 1) ** 2


def lm_index(l, m):
    return l * l + l + m


def _legendre_and_derivative(n, x):
    p_prev, p = np.ones_like(x), x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p, n * (x * p - p_prev) / (x * x - 1)


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [-1, 1] in ``np.longdouble``.

    numpy's ``leggauss`` weights carry relative errors near 1e-12 at
    ``n ~ 100``; a few Newton steps in extended precision remove them.
    """
    x = np.polynomial.legendre.leggauss(n)[0].astype(np.longdouble)
    if n == 1:
        return x, np.full(1, 2, dtype=np.longdouble)
    for _ in range(3):
        p, dp = _legendre_and_derivative(n, x)
        x = x - p / dp
    _, dp = _legendre_and_derivative(n, x)
    w = 2 / ((1 - x * x) * dp * dp)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _lm_arrays(L):
    l = np.concatenate([np.full(2 * k + 1, k) for k in range(L + 1)])
    m = np.concatenate([np.arange(-k, k + 1) for k in range(L + 1)])
    return l, m


class QuadratureGrid:
    """Tensor product quadrature on the sphere with total weight ``4 pi``.

    Integrates ``u``-polynomials of degree ``<= 2 n_theta - 1`` times
    ``exp(i k phi)`` with ``|k| < n_phi`` exactly.
    """

    def __init__(self, n_theta, n_phi):
        if n_theta < 1 or n_phi < 1:
            raise PreconditionError("grid needs at least one node per direction")
        self.n_theta = int(n_theta)
        self.n_phi = int(n_phi)
        u_ext, wu_ext = gauss_legendre(self.n_theta)
        self.u = u_ext.astype(float)
        self.u_weights = wu_ext.astype(float)
        self.theta = np.arccos(self.u)
        self.phi = 2 * np.pi * np.arange(self.n_phi) / self.n_phi
        self.weights = np.outer(self.u_weights, np.full(self.n_phi, 2 * np.pi / self.n_phi))
        self.shape = (self.n_theta, self.n_phi)

    def __repr__(self):
        return f"QuadratureGrid(n_theta={self.n_theta}, n_phi={self.n_phi})"

    def __eq__(self, other):
        return isinstance(other, QuadratureGrid) and self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)

    def mesh(self):
        """``(theta, phi)`` arrays of shape ``self.shape``."""
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def cartesian(self):
        theta, phi = self.mesh()
        st = np.sin(theta)
        return st * np.cos(phi), st * np.sin(phi), np.cos(theta)

    def resolves(self, L, field_band=None):
        """Whether analysis at band ``L`` of a band ``field_band`` field is exact."""
        if field_band is None:
            return self.n_theta >= L + 1 and self.n_phi >= 2 * L + 1
        deg = field_band + L
        return 2 * self.n_theta - 1 >= deg and self.n_phi > deg

    def harmonics(self, L):
        """Table ``Y[lm, node]`` for all ``l <= L`` (cached per grid)."""
        return _harmonic_table(self.n_theta, self.n_phi, L)

    def meridian_harmonics(self, L):
        """Table ``Y[lm, j]`` at ``phi = 0``, one column per ``theta`` node."""
        return _meridian_table(self.n_theta, L)

    def integrate(self, values):
        return np.sum(self.weights * values)


@lru_cache(maxsize=64)
def _harmonic_table(n_theta, n_phi, L):
    grid = grid_of(n_theta, n_phi)
    theta, phi = grid.mesh()
    l, m = _lm_arrays(L)
    Y = sph_harm_y(l[:, None], m[:, None], theta.ravel()[None, :], phi.ravel()[None, :])
    Y.setflags(write=False)
    return Y


@lru_cache(maxsize=64)
def _meridian_table(n_theta, L):
    theta = np.arccos(gauss_legendre(n_theta)[0].astype(float))
    l, m = _lm_arrays(L)
    Y = sph_harm_y(l[:, None], m[:, None], theta[None, :], 0.0)
    Y.setflags(write=False)
    return Y


def azimuthal_modes(f, grid):
    """``F[m + L, j]`` with ``f(theta_j, phi) = sum_m F[m + L, j] exp(i m phi)``."""
    L = f.band
    _, m = _lm_arrays(L)
    terms = f.coeffs[:, None] * grid.meridian_harmonics(L)
    F = np.zeros((2 * L + 1, grid.n_theta), dtype=complex)
    np.add.at(F, m + L, terms)
    return F


@lru_cache(maxsize=None)
def grid_of(n_theta, n_phi):
    return QuadratureGrid(n_theta, n_phi)


def grid_for_band(L):
    """Smallest grid on which products of two band ``L`` functions integrate exactly."""
    return grid_of(L + 1, 2 * L + 1)


@dataclass(frozen=True)
class GridField:
    """Values on a quadrature grid; ``band`` is the known band limit, if any."""

    grid: QuadratureGrid
    values: np.ndarray
    band: int = None

    def __post_init__(self):
        if np.shape(self.values) != self.grid.shape:
            raise PreconditionError(
                f"field shape {np.shape(self.values)} does not match grid {self.grid.shape}"
            )

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class SphereFunction:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        L = int(round(np.sqrt(c.size))) - 1
        if c.ndim != 1 or n_coeffs(L) != c.size:
            raise PreconditionError(f"{c.size} is not a valid number of coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def band(self):
        return int(round(np.sqrt(self.coeffs.size))) - 1

    def coeff(self, l, m):
        if l > self.band:
            return 0j
        return self.coeffs[lm_index(l, m)]

    def padded(self, L):
        if L < self.band:
            raise PreconditionError("use truncate() to lower the band")
        c = np.zeros(n_coeffs(L), dtype=complex)
        c[: self.coeffs.size] = self.coeffs
        return SphereFunction(c)

    def is_real(self, tol=1e-12):
        l, m = _lm_arrays(self.band)
        mirror = self.coeffs[lm_index(l, -m)]
        return bool(np.all(np.abs(mirror - (-1.0) ** m * self.coeffs.conj()) <= tol))

    def conj(self):
        l, m = _lm_arrays(self.band)
        return SphereFunction((-1.0) ** m * self.coeffs[lm_index(l, -m)].conj())

    def real_part(self):
        return (self + self.conj()) * 0.5

    def _binary(self, other, op):
        if isinstance(other, SphereFunction):
            L = max(self.band, other.band)
            return SphereFunction(op(self.padded(L).coeffs, other.padded(L).coeffs))
        return NotImplemented

    def __add__(self, other):
        if np.isscalar(other):
            other = constant(other)
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            other = constant(other)
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return SphereFunction(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, SphereFunction):
            return multiply(self, other)
        if np.isscalar(other):
            return SphereFunction(self.coeffs * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SphereFunction(self.coeffs / scalar)

    def max_abs_diff(self, other):
        """Largest coefficient difference."""
        L = max(self.band, other.band)
        return float(np.max(np.abs(self.padded(L).coeffs - other.padded(L).coeffs)))

    def sup_norm(self, oversample=8):
        """Grid estimate of ``max |f|`` on an ``oversample``-times refined grid."""
        n = oversample * (self.band + 2)
        return synthesize(self, grid_of(n, 2 * n + 1)).sup_norm()


def zero(L=0):
    return SphereFunction(np.zeros(n_coeffs(L), dtype=complex))


def constant(value, L=0):
    c = np.zeros(n_coeffs(L), dtype=complex)
    c[0] = value * np.sqrt(FOUR_PI)
    return SphereFunction(c)


def harmonic(l, m):
    """The single harmonic ``Y_{l,m}``."""
    if abs(m) > l:
        raise PreconditionError(f"|m| must not exceed l, got l={l}, m={m}")
    c = np.zeros(n_coeffs(l), dtype=complex)
    c[lm_index(l, m)] = 1.0
    return SphereFunction(c)


def coordinate_function(i):
    """Cartesian coordinate ``x^i`` (``i`` in 1, 2, 3) of the unit sphere."""
    c = np.zeros(4, dtype=complex)
    a = np.sqrt(8 * np.pi / 3) / 2
    if i == 1:
        c[lm_index(1, -1)], c[lm_index(1, 1)] = a, -a
    elif i == 2:
        c[lm_index(1, -1)], c[lm_index(1, 1)] = 1j * a, 1j * a
    elif i == 3:
        c[lm_index(1, 0)] = np.sqrt(FOUR_PI / 3)
    else:
        raise PreconditionError(f"coordinate index must be 1, 2 or 3, got {i!r}")
    return SphereFunction(c)


def coordinates():
    return tuple(coordinate_function(i) for i in (1, 2, 3))


def random_function(L, rng, real=True):
    """Seeded random band ``L`` function with unit-scale coefficients."""
    c = rng.standard_normal(n_coeffs(L)) + 1j * rng.standard_normal(n_coeffs(L))
    f = SphereFunction(c)
    return f.real_part() if real else f


def truncate(f, L):
    L = check_nonneg_int(L, "L")
    if L >= f.band:
        return f.padded(L)
    return SphereFunction(f.coeffs[: n_coeffs(L)])


def synthesize(f, grid):
    """Evaluate ``f`` on every node of ``grid``."""
    values = f.coeffs @ grid.harmonics(f.band)
    return GridField(grid, values.reshape(grid.shape), f.band)


def analyze(field, L):
    """Project grid values onto harmonics of degree ``<= L``."""
    L = check_nonneg_int(L, "L")
    grid = field.grid
    if not grid.resolves(L, field.band):
        raise AliasingError(f"{grid!r} cannot resolve band {L} of a band {field.band} field")
    weighted = (grid.weights * field.values).ravel()
    return SphereFunction(grid.harmonics(L).conj() @ weighted)


def _pointwise(band, func, *fs, grid_band=None):
    """Synthesize ``fs`` on a grid, combine values with ``func``, analyze at ``band``."""
    grid = grid_for_band(band if grid_band is None else grid_band)
    values = func(*(synthesize(f, grid).values for f in fs))
    field = GridField(grid, values, grid_band)
    return analyze(field, band)


def multiply(f, g):
    """Pointwise product; band ``L_f + L_g``."""
    return _pointwise(f.band + g.band, np.multiply, f, g)


def angular_momentum(f):
    """``(L_x f, L_y f, L_z f)`` with ``L = -i r x grad``, exact on coefficients."""
    L = f.band
    l, m = _lm_arrays(L)
    c = f.coeffs
    up = np.zeros_like(c)
    down = np.zeros_like(c)
    has_up = m < l
    has_down = m > -l
    up[lm_index(l[has_up], m[has_up] + 1)] = np.sqrt((l - m) * (l + m + 1))[has_up] * c[has_up]
    down[lm_index(l[has_down], m[has_down] - 1)] = (
        np.sqrt((l + m) * (l - m + 1))[has_down] * c[has_down]
    )
    return (
        SphereFunction((up + down) / 2),
        SphereFunction((up - down) / 2j),
        SphereFunction(m * c),
    )


def _bracket_values(x1, x2, x3, a1, a2, a3, b1, b2, b3):
    # -x . (a cross b)
    return -(
        x1 * (a2 * b3 - a3 * b2)
        + x2 * (a3 * b1 - a1 * b3)
        + x3 * (a1 * b2 - a2 * b1)
    )


def poisson_bracket(f, g):
    """Poisson bracket of the area form, normalized so that ``{x1, x2} = x3``."""
    band = f.band + g.band
    return _pointwise(
        band,
        _bracket_values,
        *coordinates(),
        *angular_momentum(f),
        *angular_momentum(g),
        grid_band=band + 1,
    )


def laplacian(f):
    """Positive Laplacian: eigenvalue ``l(l+1)`` on degree ``l`` harmonics."""
    l, _ = _lm_arrays(f.band)
    return SphereFunction(l * (l + 1) * f.coeffs)


def mean_coefficient_value(f):
    return f.coeffs[0] / np.sqrt(FOUR_PI)


def poisson_solve(g, tol=1e-10):
    """The mean-zero ``f`` with ``laplacian(f) == g``; ``g`` must have mean zero."""
    mean = mean_coefficient_value(g)
    if abs(mean) >= tol:
        raise MeanNotZeroError(mean)
    l, _ = _lm_arrays(g.band)
    c = np.zeros_like(g.coeffs)
    c[1:] = g.coeffs[1:] / (l[1:] * (l[1:] + 1))
    return SphereFunction(c)


def integrate_mean(f):
    """Average of ``f`` over the sphere, by quadrature."""
    grid = grid_for_band(f.band)
    return complex(grid.integrate(synthesize(f, grid).values) / FOUR_PI)


def jacobi_residual(f, g, h):
    """Sup norm of the cyclic Jacobi sum of the bracket."""
    pb = poisson_bracket
    total = pb(f, pb(g, h)) + pb(g, pb(h, f)) + pb(h, pb(f, g))
    return synthesize(total, grid_for_band(total.band + 1)).sup_norm()
