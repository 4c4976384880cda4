import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_hermitian
from fuzzysphere._validation import IllConditionedError, NotHermitianError, PreconditionError
from fuzzysphere.linalg import (
    PAULI,
    Block2Matrix,
    Step,
    anticommutator,
    commutator,
    eigh,
    inverse_sqrt,
    lift,
    operator_norm,
    partial_trace,
    pauli_kron,
    spectral_function,
)

s1, s2, s3 = PAULI


@pytest.mark.parametrize(
    "A, expected",
    [
        (np.eye(3), [1, 1, 1]),
        (np.diag([2.0, -1.0]), [-1, 2]),
        (s1, [-1, 1]),
    ],
)
def test_eigh_small_cases(A, expected):
    np.testing.assert_allclose(eigh(A).eigenvalues, expected, atol=1e-14)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eigh(np.array([[0, 1], [0, 0]]))


def test_non_finite_rejected():
    with pytest.raises(PreconditionError):
        operator_norm(np.array([[np.nan, 0], [0, 1]]))


@pytest.mark.parametrize("n", [1, 7, 64, 256])
def test_eigh_reconstruction_and_unitarity(rng, n):
    A = random_hermitian(rng, n)
    spec = eigh(A)
    U = spec.eigenvectors
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert operator_norm(A - spec.reconstruct()) <= 1e-10 * max(1, operator_norm(A))
    assert operator_norm(U.conj().T @ U - np.eye(n)) < 1e-12


def test_eigh_agrees_with_numpy(rng):
    A = random_hermitian(rng, 12)
    np.testing.assert_allclose(eigh(A).eigenvalues, np.linalg.eigvalsh(A), atol=1e-12)


def test_operator_norm_cases(rng):
    assert operator_norm(np.zeros((4, 4))) == 0
    assert operator_norm(np.diag([3.0, -5.0])) == pytest.approx(5)
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    top = eigh(A.conj().T @ A).eigenvalues[-1]
    assert operator_norm(A) ** 2 == pytest.approx(top, rel=1e-12)


def test_spectral_function_identity_map(rng):
    A = random_hermitian(rng, 5)
    np.testing.assert_allclose(spectral_function(A, lambda x: x), A, atol=1e-12)


def test_step_on_diagonal():
    out = spectral_function(np.diag([0.1, 0.9]), Step(0.5))
    np.testing.assert_allclose(out, np.diag([0.0, 1.0]), atol=1e-15)


def test_step_near_discontinuity_is_ill_conditioned():
    with pytest.raises(IllConditionedError):
        spectral_function(np.diag([0.5 + 1e-10, 1.0]), Step(0.5))


def test_inverse_sqrt_multiply_back(rng):
    B = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    A = B @ B.conj().T + 0.5 * np.eye(8)
    S = inverse_sqrt(A)
    np.testing.assert_allclose(S @ S @ A, np.eye(8), atol=1e-10)


def test_inverse_sqrt_needs_positive_definite():
    with pytest.raises(PreconditionError):
        inverse_sqrt(np.diag([1.0, 0.0]))


def test_commutator_cases(rng):
    A, B = random_hermitian(rng, 5), random_hermitian(rng, 5)
    assert operator_norm(commutator(A, A)) == 0
    np.testing.assert_allclose(commutator(s1, s2), 2j * s3)
    C = commutator(A, B)
    assert abs(np.trace(C)) < 1e-12
    np.testing.assert_allclose(C.conj().T, -C, atol=1e-12)
    np.testing.assert_allclose(anticommutator(s1, s2), 0)


def test_commutator_dimension_mismatch():
    with pytest.raises(PreconditionError):
        commutator(np.eye(2), np.eye(3))


def test_partial_trace_cases(rng):
    P = random_hermitian(rng, 3)
    Z = np.zeros((3, 3))
    np.testing.assert_allclose(partial_trace(Block2Matrix(P, Z, Z, Z)), P)
    Zb, X, W = random_hermitian(rng, 3), rng.standard_normal((3, 3)), random_hermitian(rng, 3)
    E = Block2Matrix(Zb, X, X.conj().T, np.eye(3) - W)
    np.testing.assert_allclose(partial_trace(E), Zb + np.eye(3) - W)


def test_block_roundtrip_and_adjoint(rng):
    E = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    B = Block2Matrix.from_dense(E)
    np.testing.assert_array_equal(B.to_dense(), E)
    np.testing.assert_array_equal(B.adjoint().to_dense(), E.conj().T)
    with pytest.raises(PreconditionError):
        Block2Matrix.from_dense(np.eye(3))


def test_from_pauli_matches_kron(rng):
    tau, x1, x2, x3 = (random_hermitian(rng, 4) for _ in range(4))
    dense = lift(tau) + pauli_kron((x1, x2, x3))
    np.testing.assert_allclose(Block2Matrix.from_pauli(tau, x1, x2, x3).to_dense(), dense, atol=1e-14)


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_step_projection_is_idempotent(seed, n):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, n)
    w = np.linalg.eigvalsh(A)
    if np.min(np.abs(w - 0.5)) < 1e-6:
        return
    P = spectral_function(A, Step(0.5))
    assert operator_norm(P @ P - P) < 1e-10
    assert operator_norm(P - P.conj().T) < 1e-10


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_partial_trace_linear_and_hermitian(seed, t):
    rng = np.random.default_rng(seed)
    E, F = (random_hermitian(rng, 6) for _ in range(2))
    lhs = partial_trace(E + t * F)
    np.testing.assert_allclose(lhs, partial_trace(E) + t * partial_trace(F), atol=1e-12)
    np.testing.assert_allclose(lhs, lhs.conj().T, atol=1e-12)
