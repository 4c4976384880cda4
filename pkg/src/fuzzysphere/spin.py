"""Spin-N/2 irreducible representations and coherent-state frames."""
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from ._validation import AliasingError, check_nonneg_int
from .sphere import FOUR_PI, QuadratureGrid, gauss_legendre


@dataclass(frozen=True, eq=False)
class SpinOperators:
    """Generators ``J1, J2, J3`` on the ``N + 1`` dimensional irrep.

    Basis index ``k = 0..N`` carries ``J3 = N/2 - k``.
    """

    N: int
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray

    @property
    def hbar(self):
        return 2.0 / self.N if self.N else np.inf

    @property
    def dim(self):
        return self.N + 1

    def __iter__(self):
        return iter((self.J1, self.J2, self.J3))

    def casimir(self):
        return self.J1 @ self.J1 + self.J2 @ self.J2 + self.J3 @ self.J3

    def raising(self):
        return self.J1 + 1j * self.J2


def build_spin(N):
    N = check_nonneg_int(N, "N")
    k = np.arange(N)
    plus = np.diag(np.sqrt((k + 1.0) * (N - k)), 1).astype(complex)
    minus = plus.conj().T
    J3 = np.diag(N / 2 - np.arange(N + 1)).astype(complex)
    for A in (plus, minus, J3):
        A.setflags(write=False)
    J1 = (plus + minus) / 2
    J2 = (plus - minus) / 2j
    J1.setflags(write=False)
    J2.setflags(write=False)
    return SpinOperators(N, J1, J2, J3)


@dataclass(frozen=True, eq=False)
class CoherentFrame:
    """Values of the normalized sections ``s_k`` at every node of ``grid``.

    ``sections`` has shape ``(N + 1, n_nodes)`` and obeys
    ``sum_k |s_k|^2 == 1`` pointwise.  ``profiles`` holds the real moduli
    ``|s_k|`` at the ``theta`` nodes in extended precision.
    """

    N: int
    grid: QuadratureGrid
    sections: np.ndarray
    profiles: np.ndarray

    def resolution_defect(self):
        return float(np.max(np.abs(np.sum(np.abs(self.sections) ** 2, axis=0) - 1)))

    def gram(self):
        w = self.grid.weights.ravel()
        S = self.sections
        return (self.N + 1) / FOUR_PI * (S.conj() * w) @ S.T


def build_frame(N, grid):
    N = check_nonneg_int(N, "N")
    if 2 * grid.n_theta - 1 < N or grid.n_phi <= N:
        raise AliasingError(f"{grid!r} cannot integrate the degree {N} frame exactly")
    theta, phi = grid.mesh()
    theta, phi = theta.ravel(), phi.ravel()
    k = np.arange(N + 1)[:, None]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    sections = (
        np.sqrt(comb(N, k))
        * c[None, :] ** (N - k)
        * s[None, :] ** k
        * np.exp(-1j * k * phi[None, :])
    )
    sections.setflags(write=False)
    return CoherentFrame(N, grid, sections, section_profiles(N, grid.n_theta))


def section_profiles(N, n_theta):
    """``sqrt(binom(N, k)) cos^(N-k)(theta/2) sin^k(theta/2)`` on the Gauss nodes."""
    u = gauss_legendre(n_theta)[0]
    c, s = np.sqrt((1 + u) / 2), np.sqrt((1 - u) / 2)
    k = np.arange(N + 1)
    binom = np.array([comb(N, j, exact=True) for j in k], dtype=np.longdouble)
    a = np.sqrt(binom)[:, None] * c[None, :] ** (N - k)[:, None] * s[None, :] ** k[:, None]
    a.setflags(write=False)
    return a
