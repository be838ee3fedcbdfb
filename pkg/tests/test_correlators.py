import numpy as np
import pytest

from xychain import ModelParams, build_table, correlator_finite, correlator_thermo
from xychain.scaling import derivative


def critical_closed_form(r: int) -> float:
    return 2.0 * (-1) ** r / (np.pi * (2 * r + 1))


def test_field_only_delta_table():
    params = ModelParams(0.0, 1.0, 11)
    assert correlator_finite(params, 0) == pytest.approx(1.0, abs=1e-14)
    for r in (1, 2, 3, -4):
        assert correlator_finite(params, r) == pytest.approx(0.0, abs=1e-14)
    table = build_table(params, -3, 3)
    for r in range(-3, 4):
        assert table[r] == pytest.approx(1.0 if r == 0 else 0.0, abs=1e-14)


def test_thermo_field_only():
    assert correlator_thermo(ModelParams(0.0, 1.0), 0) == pytest.approx(1.0, abs=1e-12)
    assert correlator_thermo(ModelParams(0.0, 1.0), 2) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("r", range(-3, 4))
def test_critical_closed_form_thermo(r):
    val = correlator_thermo(ModelParams(1.0, 1.0), r)
    assert val == pytest.approx(critical_closed_form(r), abs=1e-12)


def test_critical_closed_form_large_finite_chain():
    params = ModelParams(1.0, 1.0, 1001)
    assert correlator_finite(params, 0) == pytest.approx(2 / np.pi, abs=2e-3)
    for r in range(-3, 4):
        assert correlator_finite(params, r) == pytest.approx(
            critical_closed_form(r), abs=2e-3)


def test_thermo_large_coupling_limit():
    # G_{-1} -> 1 as the coupling dominates the field
    assert correlator_thermo(ModelParams(10.0, 1.0), -1) == pytest.approx(1.0, abs=2e-2)
    assert correlator_thermo(ModelParams(1e4, 1.0), -1) == pytest.approx(1.0, abs=2e-4)


def test_table_matches_pointwise_ops():
    params = ModelParams(0.7, 1.0, 101)
    table = build_table(params, -4, 4)
    for r in range(-4, 5):
        assert table[r] == correlator_finite(params, r)
    with pytest.raises(KeyError):
        table[5]
    with pytest.raises(ValueError):
        build_table(params, 2, 1)


def test_finite_to_thermo_convergence():
    # off-critical couplings converge exponentially (down to round-off),
    # the critical point still converges but only algebraically
    for lam, floor in ((0.5, 1e-14), (1.3, 1e-14), (1.0, 0.0)):
        thermo = correlator_thermo(ModelParams(lam, 1.0), 2)
        errs = [abs(correlator_finite(ModelParams(lam, 1.0, L), 2) - thermo)
                for L in (101, 501, 2001)]
        assert all(e2 <= e1 + floor for e1, e2 in zip(errs, errs[1:]))
        assert errs[2] < 1e-6


def test_finite_chain_close_to_thermo_table():
    thermo = build_table(ModelParams(0.5, 1.0), -5, 5)
    finite = build_table(ModelParams(0.5, 1.0, 2001), -5, 5)
    for r in range(-5, 6):
        assert finite[r] == pytest.approx(thermo[r], abs=1e-3)


def test_correlator_smooth_away_from_transition():
    # central stencils at two step sizes agree to the stencil order
    def g(lam):
        return correlator_thermo(ModelParams(lam, 1.0), 1, tol=1e-12)

    d1 = derivative(g, 0.6, h=1e-2)
    d2 = derivative(g, 0.6, h=5e-3)
    assert d1 == pytest.approx(d2, abs=1e-7)


def test_rejects_thermo_in_finite_op_and_vice_versa():
    with pytest.raises(ValueError):
        correlator_finite(ModelParams(1.0, 1.0), 0)
    with pytest.raises(ValueError):
        correlator_thermo(ModelParams(1.0, 1.0), 0, tol=-1.0)
