"""Input validation helpers and exception types shared by every module."""
import numpy as np

HERMITIAN_TOL = 1e-12


class PreconditionError(ValueError):
    """An operation was called with input violating its precondition."""


class NotHermitianError(PreconditionError):
    pass


class IllConditionedError(PreconditionError):
    """A spectral step function would be evaluated at its discontinuity."""


class SpectrumTooWideError(PreconditionError):
    """Purification needs ``||A - A^2|| < 1/4``."""

    def __init__(self, residual):
        self.residual = float(residual)
        super().__init__(
            f"||A - A^2|| = {self.residual:.6g} is not below 1/4; "
            "the spectrum does not separate at 1/2"
        )


class AliasingError(PreconditionError):
    """A quadrature grid is too coarse for the requested band limit."""


class MeanNotZeroError(PreconditionError):
    def __init__(self, mean):
        self.mean = complex(mean)
        super().__init__(f"Poisson equation needs a mean-zero source, got mean {self.mean:.6g}")


def as_matrix(A, name="A"):
    """Return ``A`` as a finite, square, complex 2-D array."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise PreconditionError(f"{name} has non-finite entries")
    return A.astype(complex, copy=False)


def hermitian_defect(A):
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def check_hermitian(A, name="A", tol=HERMITIAN_TOL):
    """Validate that ``A`` is Hermitian to ``tol`` relative to its largest entry."""
    A = as_matrix(A, name)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    defect = hermitian_defect(A)
    if defect > tol * scale:
        raise NotHermitianError(f"{name} is not Hermitian: max |A - A^H| = {defect:.3g}")
    return A


def check_same_shape(A, B):
    if A.shape != B.shape:
        raise PreconditionError(f"dimension mismatch: {A.shape} vs {B.shape}")


def check_nonneg_int(value, name):
    if int(value) != value or value < 0:
        raise PreconditionError(f"{name} must be a nonnegative integer, got {value!r}")
    return int(value)
