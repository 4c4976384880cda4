import numpy as np
import pytest
from hypothesis import given, strategies as st
from sklearn.base import clone

from conftest import random_hermitian
from fuzzysphere._validation import PreconditionError
from fuzzysphere.certify import (
    LaurentPolynomial,
    LaurentThetaRegressor,
    allowed_points,
    block_decompose,
    certify_pipeline,
    certify_projection,
    certify_step,
    excluded_points,
    extract_integer,
    fit_theta,
    integer_distance_scan,
    interleaves,
    spec_union_margin,
    spectrum_sum_margin,
    trace_bounds,
)
from fuzzysphere.linalg import Block2Matrix, as_dense
from fuzzysphere.projections import bott_projection, equivariant_projection, purify_spectral, quantize_block
from fuzzysphere.toeplitz import ScanGrid, get_config


def complement(e):
    E = as_dense(e)
    return Block2Matrix.from_dense(np.eye(E.shape[0]) - E)


# -- spectrum bound --------------------------------------------------------------

def test_margin_cases():
    a = np.diag([0.0, 1.0])
    assert spectrum_sum_margin(a, np.zeros((2, 2))) == 0
    assert spectrum_sum_margin(a, np.diag([0.1, -0.1])) == pytest.approx(0, abs=1e-15)


@given(st.integers(0, 2**31), st.integers(1, 16))
def test_margin_nonnegative(seed, n):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, n)
    b = random_hermitian(rng, n, scale=rng.uniform(0, 2))
    assert spectrum_sum_margin(a, b) >= -1e-12


def test_margin_needs_matching_hermitian():
    with pytest.raises(PreconditionError):
        spectrum_sum_margin(np.eye(2), np.eye(3))
    with pytest.raises(PreconditionError):
        spectrum_sum_margin(np.eye(2), np.array([[0, 1], [0, 0]]))


# -- block relations -------------------------------------------------------------

def test_block_relations_equivariant():
    d = block_decompose(equivariant_projection(4))
    assert d.relation_residuals["intertwine"] < 1e-10
    assert d.max_residual() < 1e-12
    assert spec_union_margin(d) < 1e-10


@pytest.mark.parametrize("x3", [-0.6, 0.0, 0.9])
def test_block_relations_classical_point(x3):
    r = np.sqrt(1 - x3**2)
    e = 0.5 * np.array([[1 + x3, r], [r, 1 - x3]])
    d = block_decompose(e)
    assert d.Z[0, 0] == pytest.approx((1 + x3) / 2)
    assert d.W[0, 0] == pytest.approx((1 + x3) / 2)
    assert d.max_residual() < 1e-15


def test_block_relations_diagonal():
    e = Block2Matrix(np.diag([1.0, 0.0]), np.zeros((2, 2)), np.zeros((2, 2)), np.diag([0.0, 1.0]))
    d = block_decompose(e)
    assert not d.X.any()
    assert set(np.diag(d.Z)) <= {0, 1} and set(np.diag(d.W)) <= {0, 1}
    assert spec_union_margin(d) == 0


def test_block_residuals_scale_with_idempotency(rng):
    e = as_dense(equivariant_projection(6))
    noisy = e + 1e-9 * random_hermitian(rng, e.shape[0])
    d = block_decompose(noisy)
    defect = np.linalg.norm(noisy @ noisy - noisy, 2)
    assert d.max_residual() < 100 * defect


# -- trace bounds and integers -----------------------------------------------------------

def test_trace_bounds_equivariant_and_complement():
    e = equivariant_projection(4)
    alpha, beta = trace_bounds(e)
    assert alpha == pytest.approx(0.2) and beta == pytest.approx(0.2)
    a2, b2 = trace_bounds(complement(e))
    assert (a2, b2) == pytest.approx((-beta, -alpha))


@pytest.mark.parametrize(
    "alpha, beta, status, ks",
    [
        (0.2, 0.2, "unique", [5]),
        (-0.1, 0.1, "inconclusive", []),
        (0.18, 0.22, "unique", [5]),
        (0.15, 0.26, "multiple", [4, 5, 6]),
        (0.21, 0.24, "violation", []),
        (-0.2, -0.2, "unique", [-5]),
        (1.0, 1.0, "unique", [1]),
    ],
)
def test_extract_integer(alpha, beta, status, ks):
    cert = extract_integer(alpha, beta)
    assert cert.status == status
    assert cert.k_candidates == ks
    for k in ks:
        assert alpha - 1e-12 <= 1 / k <= beta + 1e-12


def test_extract_integer_needs_ordered_bounds():
    with pytest.raises(PreconditionError):
        extract_integer(0.3, 0.2)


def test_extract_integer_near_zero_is_bounded():
    cert = extract_integer(1e-9, 2e-9, slack=0, max_candidates=100)
    assert cert.status == "multiple"
    assert len(cert.k_candidates) <= 101


@given(st.integers(1, 10**5))  # reciprocal spacing 1/k^2 must exceed the slack
def test_extract_integer_exact_reciprocals(k):
    cert = extract_integer(1 / k, 1 / k)
    assert cert.unique and cert.k == k


@pytest.mark.parametrize("N", [1, 3, 8, 20])
def test_certificates_of_complements_agree(N):
    e = purify_spectral(quantize_block(get_config(N), bott_projection()))
    c1, c2 = certify_projection(e), certify_projection(complement(e))
    assert c1.k == N + 1 and c2.k == -(N + 1)
    assert (c2.alpha, c2.beta) == pytest.approx((-c1.beta, -c1.alpha))
    assert c1.status != "violation"


# -- theta fit -------------------------------------------------------------------------

def test_fit_theta_equivariant_data():
    Ns = np.arange(2, 20)
    theta = fit_theta(2 / Ns, 1 / (Ns + 1))
    assert theta.c0 == pytest.approx(1, abs=1e-10)
    assert np.max(np.abs(theta.tail[1:])) < 1e-10
    assert theta.residual < 1e-9


@pytest.mark.parametrize(
    "coeffs", [(0.0,), (3.0, -1.0), (0.5, 2.0, -0.25), (1.0, 0.0, 0.3, 0.1)]
)
def test_fit_theta_recovers_synthetic(coeffs):
    h = 2 / np.arange(4, 30)
    exact = LaurentPolynomial(tuple(coeffs))
    degree = max(len(coeffs) - 1, 1)
    theta = fit_theta(h, 1 / exact(h), degree)
    np.testing.assert_allclose(np.array(theta.tail)[: len(coeffs)], coeffs, atol=1e-10)


def test_fit_theta_shift_by_integer():
    h = 2 / np.arange(4, 30)
    base = LaurentPolynomial((1.0, 0.2))
    fitted = fit_theta(h, 1 / base.shifted(1)(h), 1)
    assert fitted.c0 == pytest.approx(2.0, abs=1e-10)
    np.testing.assert_allclose(fitted.tail[1:], base.tail[1:], atol=1e-10)


def test_fit_theta_singular():
    with pytest.raises(PreconditionError):
        fit_theta(np.full(5, 0.5), np.full(5, 0.2), 2)


def test_unconstrained_diagnostic_finds_leading_two():
    h = 2 / np.arange(4, 30)
    theta = fit_theta(h, 1 / (2 / h + 1), 1, constrain_leading=False)
    assert theta.leading == pytest.approx(2, abs=1e-9)


def test_regressor_interface():
    Ns = np.arange(4, 30)
    h, tau = 2 / Ns, 1 / (Ns + 1)
    reg = LaurentThetaRegressor(degree=1).fit(h[:, None], tau)
    np.testing.assert_allclose(reg.predict(h), tau, rtol=1e-12)
    assert reg.coef_[0] == pytest.approx(1, abs=1e-10)
    assert np.max(reg.integer_distances(h)) < 1e-9
    assert reg.score(h[:, None], tau) == pytest.approx(1)
    assert clone(reg).get_params() == {"degree": 1}


# -- distances and exclusions ----------------------------------------------------------

def test_distance_scan_cases():
    h = 2 / np.arange(2, 41)
    assert np.max(integer_distance_scan(LaurentPolynomial((1.0,)), h)) < 1e-9
    np.testing.assert_allclose(integer_distance_scan(LaurentPolynomial((0.5,)), h), 0.5, atol=1e-12)


def test_excluded_points():
    assert excluded_points(1, [10])[0] == pytest.approx(4 / 19)
    ks = range(2, 41)
    pts = excluded_points(1, ks)
    np.testing.assert_allclose(integer_distance_scan(LaurentPolynomial((1.0,)), pts), 0.5, atol=1e-12)
    with pytest.raises(PreconditionError):
        excluded_points(3, [1, 2])


def test_interleaving_c_one():
    ks = np.arange(2, 41)
    ex, ok = excluded_points(1, ks), 2 / ks
    assert interleaves(ex, ok)
    for N in range(2, 40):
        h = 2 / (N + 0.5)
        assert 2 / (N + 1) < h < 2 / N


def test_half_constant_collides_with_naive_grid():
    ks = np.arange(2, 20)
    assert np.array_equal(excluded_points(0.5, ks), 2 / ks)
    assert not interleaves(excluded_points(0.5, ks), 2 / ks)
    assert interleaves(excluded_points(0.5, ks), allowed_points(0.5, ks))


# -- pipeline ----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def unperturbed():
    return certify_pipeline(ScanGrid(tuple(range(2, 21))))


def test_pipeline_unperturbed(unperturbed):
    assert all(s.certificate.k == s.N + 1 for s in unperturbed.steps)
    assert unperturbed.N0 == 2
    assert abs(unperturbed.theta.c0 - 1) < 1e-8
    assert np.max(unperturbed.distances) < 1e-9


def test_pipeline_rounds_do_not_matter_when_flat():
    a = certify_pipeline([3, 5, 8], squash_rounds=0)
    b = certify_pipeline([3, 5, 8], squash_rounds=2)
    for sa, sb in zip(a.steps, b.steps):
        assert (sa.certificate.alpha, sa.certificate.beta) == (sb.certificate.alpha, sb.certificate.beta)


def test_zero_perturbation_is_bit_exact():
    cfg = get_config(9)
    a = certify_step(cfg)
    b = certify_step(cfg, eps=0.0, seed=123)
    assert a.certificate.alpha == b.certificate.alpha and a.certificate.beta == b.certificate.beta


def test_perturbed_step_at_24():
    step = certify_step(get_config(24), eps=0.05, seed=0)
    cert = step.certificate
    assert cert.alpha < cert.beta
    assert abs(step.tau - 1 / 25) < 1e-6
    assert cert.k == 25
    assert cert.spec_union_margin < 1e-8
    assert all(after <= before for before, after in step.spreads)
