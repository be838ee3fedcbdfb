import numpy as np
import pytest

from xychain import Arrangement, ModelParams, build_rdm
from xychain.certcheck import check_certificate
from xychain.gmn import genuine_negativity
from xychain.separability import (
    FilterError,
    Inconclusive,
    SeparabilityCertificate,
    ball_check,
    certify_biseparable,
    filter_normal_form,
)


def ghz3():
    v = np.zeros(8)
    v[0] = v[7] = 1 / np.sqrt(2)
    return np.outer(v, v)


def test_ball_check_basics():
    assert ball_check(np.eye(8) / 8)          # purity 1/8 < 1/7
    assert ball_check(np.eye(16) / 16)        # purity 1/16 < 1/15
    assert not ball_check(ghz3())             # pure state
    # purity exactly 1/7: strict inequality as stated
    boundary = np.diag([0.0] + [1.0 / 7.0] * 7)
    assert np.trace(boundary @ boundary) == pytest.approx(1 / 7)
    assert not ball_check(boundary)


def test_filter_normal_form_fixed_point():
    res = filter_normal_form(np.eye(8) / 8)
    assert res.converged and res.iterations == 0
    assert all(np.allclose(f, np.eye(2)) for f in res.filters)


def test_filter_normal_form_rejects_pure_products():
    v = np.kron(np.kron([1.0, 0.0], [1.0, 0.0]), [0.0, 1.0])
    with pytest.raises(FilterError):
        filter_normal_form(np.outer(v, v))


def test_filter_normal_form_flattens_marginals():
    rho = build_rdm(ModelParams(1.0, 1.0, None), Arrangement((2, 2))).matrix
    res = filter_normal_form(rho)
    assert res.converged
    from xychain.rdm import partial_trace_matrix

    for i in range(3):
        marg = partial_trace_matrix(res.filtered_state, (i,), 3)
        assert np.max(np.abs(marg - np.eye(2) / 2)) < 1e-10
    # filters are invertible and map the input onto the filtered state
    big = np.array([[1.0]])
    for f in res.filters:
        assert abs(np.linalg.det(f)) > 1e-6
        big = np.kron(big, f)
    mapped = big @ rho @ big.T
    mapped /= mapped.trace()
    assert np.max(np.abs(mapped - res.filtered_state)) < 1e-10


def test_maximally_mixed_certifies_with_zero_components():
    cert = certify_biseparable(np.eye(8) / 8)
    assert isinstance(cert, SeparabilityCertificate)
    assert len(cert.weights) == 0
    assert cert.tail_weight == pytest.approx(1.0)
    ok, _ = check_certificate(cert)
    assert ok


def test_ghz_stays_inconclusive():
    result = certify_biseparable(ghz3(), max_iter=400, seed=5)
    assert isinstance(result, Inconclusive)
    # the convex residual stays far from the certifying ball
    assert result.gap > 0.1


def test_certifies_separated_marginals_and_checker_agrees():
    rho = build_rdm(ModelParams(1.0, 1.0, None), Arrangement((1, 3)))
    cert = certify_biseparable(rho, max_iter=10_000, seed=0)
    assert isinstance(cert, SeparabilityCertificate)
    assert cert.iterations < 10_000
    ok, report = check_certificate(cert)
    assert ok, report
    assert ball_check(cert.tail)
    # consistency: a certified state is never simultaneously detected
    assert genuine_negativity(rho).value <= 1e-7


def test_certificate_is_deterministic():
    rho = build_rdm(ModelParams(1.2, 1.0, None), Arrangement((2, 2)))
    a = certify_biseparable(rho, seed=11)
    b = certify_biseparable(rho, seed=11)
    assert isinstance(a, SeparabilityCertificate)
    assert a.iterations == b.iterations
    assert np.array_equal(np.asarray(a.weights), np.asarray(b.weights))
    assert all(np.array_equal(x, y) for x, y in zip(a.vectors, b.vectors))


def test_inconclusive_is_reported_for_near_pure_separable_states():
    # tiny eigenvalues near lam -> 0: honesty matters more than success
    rho = build_rdm(ModelParams(0.05, 1.0, None), Arrangement((1, 3)))
    result = certify_biseparable(rho, max_iter=60, seed=1)
    assert isinstance(result, (Inconclusive, SeparabilityCertificate))
    if isinstance(result, Inconclusive):
        assert result.iterations <= 60


def test_input_validation():
    with pytest.raises(ValueError):
        certify_biseparable(np.eye(8) / 8, max_iter=0)
