"""Dense Hermitian numerics and 2x2 block bookkeeping.

Everything spectral goes through :func:`eigh`.  Matrices are plain complex
``ndarray`` objects and are never modified in place.
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg

from ._validation import (
    IllConditionedError,
    PreconditionError,
    as_matrix,
    check_hermitian,
    check_same_shape,
)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def eigh(A):
    """Ascending eigendecomposition of a Hermitian matrix."""
    A = check_hermitian(A)
    # symmetrize so the backend sees an exactly Hermitian input
    w, U = scipy.linalg.eigh((A + A.conj().T) / 2)
    return Spectrum(w, U)


def operator_norm(A):
    """Largest singular value."""
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


@dataclass(frozen=True)
class Step:
    """Indicator of ``x > threshold``; a 0/1 function with one discontinuity."""

    threshold: float = 0.5

    def __call__(self, x):
        return (np.asarray(x) > self.threshold).astype(float)

    @property
    def breakpoints(self):
        return (self.threshold,)


def spectral_function(A, func: Callable, *, breakpoints: Sequence[float] = None, gap_tol=1e-8):
    """Return ``U func(Lambda) U^H`` for Hermitian ``A``.

    ``breakpoints`` lists the discontinuities of ``func``; taken from
    ``func.breakpoints`` when present.  An eigenvalue within ``gap_tol`` of
    one raises :class:`IllConditionedError`.
    """
    spec = eigh(A)
    if breakpoints is None:
        breakpoints = getattr(func, "breakpoints", ())
    for b in breakpoints:
        if spec.eigenvalues.size and np.min(np.abs(spec.eigenvalues - b)) <= gap_tol:
            raise IllConditionedError(
                f"eigenvalue within {gap_tol:g} of the discontinuity at {b:g}"
            )
    values = np.asarray(func(spec.eigenvalues), dtype=complex)
    U = spec.eigenvectors
    return (U * values) @ U.conj().T


def inverse_sqrt(A):
    """Inverse square root of a Hermitian positive definite matrix."""
    spec = eigh(A)
    if spec.eigenvalues.size and spec.eigenvalues[0] <= 0:
        raise PreconditionError("inverse square root needs a positive definite matrix")
    U = spec.eigenvectors
    return (U * spec.eigenvalues ** -0.5) @ U.conj().T


def commutator(A, B):
    A, B = as_matrix(A), as_matrix(B)
    check_same_shape(A, B)
    return A @ B - B @ A


def anticommutator(A, B):
    A, B = as_matrix(A), as_matrix(B)
    check_same_shape(A, B)
    return A @ B + B @ A


@dataclass(frozen=True)
class Block2Matrix:
    """An element ``[[a, b], [c, d]]`` of 2x2 matrices over a matrix algebra."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(x) for x in (self.a, self.b, self.c, self.d)}
        if len(shapes) != 1:
            raise PreconditionError(f"blocks must share one shape, got {shapes}")

    @property
    def dim(self):
        return self.a.shape[0]

    @classmethod
    def from_dense(cls, E):
        E = as_matrix(E, "E")
        n, r = divmod(E.shape[0], 2)
        if r:
            raise PreconditionError("a 2x2 block matrix needs even dimension")
        return cls(E[:n, :n].copy(), E[:n, n:].copy(), E[n:, :n].copy(), E[n:, n:].copy())

    @classmethod
    def from_pauli(cls, tau, x1, x2, x3):
        """``tau (x) 1 + sigma_i (x) x^i``."""
        return cls(tau + x3, x1 - 1j * x2, x1 + 1j * x2, tau - x3)

    def to_dense(self):
        return np.block([[self.a, self.b], [self.c, self.d]])

    def adjoint(self):
        return Block2Matrix(self.a.conj().T, self.c.conj().T, self.b.conj().T, self.d.conj().T)


def as_dense(E):
    return E.to_dense() if isinstance(E, Block2Matrix) else as_matrix(E, "E")


def as_block2(E):
    return E if isinstance(E, Block2Matrix) else Block2Matrix.from_dense(E)


def partial_trace(E):
    """Sum of the diagonal blocks, ``a + d``."""
    E = as_block2(E)
    return E.a + E.d


def lift(A):
    """``A`` acting diagonally on both block rows, i.e. ``1_2 (x) A``."""
    return np.kron(np.eye(2), as_matrix(A))


def pauli_kron(ops):
    """``sum_i sigma_i (x) ops[i]`` as a dense block matrix."""
    return sum(np.kron(s, op) for s, op in zip(PAULI, ops))
