import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from exosuit.errors import DomainError, FitError
from exosuit.fpam import (
    EPS_MAX_LIMIT, FpamSpec, ForceCurveFit, PolynomialForceFit, TensileDataset, elastic_force,
    eps_max_from_orientation, fiber_orientation, fit_force_curves, fit_polynomial_curve,
    fit_zero_pressure, force_at_contraction, fpam_force, identify_spec, moving_average,
    pressure_force, synthetic_tensile_data,
)
from exosuit.presets import MEASURED_L0, MEASURED_R0, TENSILE_TABLE, flexor_spec


def table3_row(p_kpa):
    r_cm, em = TENSILE_TABLE[p_kpa]
    return FpamSpec(L0=0.34, r0=r_cm / 100, t=0.08e-3, E=9.06e6, eps0=0.153,
                    eps_max_by_pressure={p_kpa * 1e3: em})


def test_fiber_orientation_value():
    a = fiber_orientation(0.28)
    assert a == pytest.approx(0.641, abs=1e-3)
    assert pressure_force(137e3, 0.0126, a, 0.28) == pytest.approx(0.0, abs=1e-9)


def test_fiber_orientation_table_row():
    a = fiber_orientation(0.277)
    root = brentq(lambda e: pressure_force(1.0, 1.0, a, e), 0.0, 0.42)
    assert root == pytest.approx(0.277, abs=1e-10)


def test_fiber_orientation_domain_boundary():
    a = fiber_orientation(EPS_MAX_LIMIT)
    assert math.isfinite(a)
    assert a == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 0.5, 0.9])
def test_fiber_orientation_rejects(bad):
    with pytest.raises(DomainError):
        fiber_orientation(bad)


def test_force_at_137_kpa_oracle():
    spec = table3_row(137)
    # independent evaluation of both terms
    P, r0, t, E, eps0 = 137e3, 0.0126, 0.08e-3, 9.06e6, 0.153
    alpha = -math.asin(math.sqrt(0.277 ** 2 - 2 * 0.277 + 2 / 3) / (0.277 - 1))
    expected = (math.pi * P * r0 ** 2 * (3 * math.cos(alpha) ** 2 - 1) / math.sin(alpha) ** 2
                + 2 * math.pi * E * t * eps0 * r0)
    assert fpam_force(spec, P, 0.34) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(181.0, abs=0.5)


def test_force_zero_at_eps_max():
    spec = table3_row(137)
    assert force_at_contraction(spec, 137e3, 0.277) == pytest.approx(0.0, abs=1e-9)


def test_deflated_slack_is_zero():
    spec = flexor_spec()
    assert force_at_contraction(spec, 0.0, 0.2) == 0.0
    assert force_at_contraction(spec, 0.0, 0.153) == 0.0


def test_force_clamped_non_negative():
    spec = table3_row(137)
    assert force_at_contraction(spec, 137e3, 0.35) == 0.0


def test_elastic_continuous_at_eps0():
    assert elastic_force(9.06e6, 0.08e-3, 0.012, 0.153, 0.153 - 1e-12) == pytest.approx(0.0, abs=1e-6)
    assert elastic_force(9.06e6, 0.08e-3, 0.012, 0.153, 0.2) == 0.0


def test_eps_interpolated_between_pressures():
    spec = flexor_spec()
    assert spec.eps_max(51e3) == pytest.approx(0.5 * (0.303 + 0.296))


def test_pressure_out_of_range():
    spec = flexor_spec()
    with pytest.raises(DomainError):
        spec.eps_max(200e3)
    clamped = FpamSpec(**{**spec.__dict__, "extrapolate": True})
    assert clamped.eps_max(200e3) == pytest.approx(0.277)


def test_force_rejects_full_contraction():
    with pytest.raises(DomainError):
        force_at_contraction(flexor_spec(), 137e3, 1.0)
    with pytest.raises(DomainError):
        fpam_force(flexor_spec(), 137e3, 0.0)


def test_spec_invariants():
    with pytest.raises(ValueError):
        FpamSpec(L0=0.3, r0=0.01, t=1e-4, E=1e6, eps0=0.2, eps_max_by_pressure={1e5: 0.1})
    with pytest.raises(ValueError):
        FpamSpec(L0=-0.3, r0=0.01, t=1e-4, E=1e6, eps0=0.1, eps_max_by_pressure={1e5: 0.2})


def test_spec_json_round_trip():
    spec = flexor_spec()
    assert FpamSpec.from_dict(spec.to_dict()) == spec
    d = spec.to_dict()
    assert {"l0_m", "r0_m", "t_m", "e_pa", "eps0", "eps_max"} <= set(d)
    assert d["eps_max"][0] == {"p_pa": 0.0, "value": 0.153}


ALPHA_LIMIT = math.acos(1 / math.sqrt(3))  # no contraction root beyond this fiber angle


@settings(max_examples=50, deadline=None)
@given(st.floats(0.6, ALPHA_LIMIT - 1e-3))
def test_orientation_identity(alpha):
    em = brentq(lambda e: pressure_force(1.0, 1.0, alpha, e), 1e-9, 1 - 1e-9)
    assert em == pytest.approx(eps_max_from_orientation(alpha), abs=1e-12)
    assert fiber_orientation(em) == pytest.approx(alpha, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([34, 68, 103, 137]), st.floats(0.0, 1.0))
def test_force_monotone_in_eps(p_kpa, frac):
    spec = table3_row(p_kpa)
    em = spec.eps_max(p_kpa * 1e3)
    e = frac * em * 0.999
    assert force_at_contraction(spec, p_kpa * 1e3, e) > force_at_contraction(
        spec, p_kpa * 1e3, e + 1e-3 * em)


@pytest.mark.parametrize("alpha", [ALPHA_LIMIT + 1e-3, 1.0, 1.2])
def test_steep_fibers_never_pull(alpha):
    eps = np.linspace(0.0, 0.99, 200)
    assert all(pressure_force(1.0, 1.0, alpha, e) <= 0.0 for e in eps)
    assert eps_max_from_orientation(alpha) < 0.0


def test_moving_average_shrinks_at_ends():
    y = np.arange(10.0)
    np.testing.assert_allclose(moving_average(y, 3), y)
    assert moving_average(np.array([0.0, 0.0, 3.0, 0.0, 0.0]), 3)[2] == pytest.approx(1.0)


def test_dataset_invariants():
    with pytest.raises(ValueError):
        TensileDataset({1e5: np.zeros((5, 2))})
    with pytest.raises(ValueError):
        TensileDataset({1e5: np.column_stack([np.linspace(-0.2, 0.3, 20), np.zeros(20)])})


def test_single_eps_value_fit_fails():
    with pytest.raises(FitError):
        fit_polynomial_curve(np.full(20, 0.1), np.linspace(0, 1, 20), 1e5)


def test_polynomial_zero_crossing_none():
    fit = PolynomialForceFit(1e5, np.polynomial.Polynomial([1.0]), (0.0, 0.3), 0.0)
    assert fit.zero_crossing is None


def test_zero_pressure_branch_continuity():
    eps = np.linspace(-0.02, 0.25, 60)
    f = np.array([elastic_force(9.06e6, 0.08e-3, 0.0123, 0.153, e) for e in eps])
    z = fit_zero_pressure(eps, f)
    assert z.eps0 == pytest.approx(0.153, abs=5e-3)
    assert z(z.eps0) == 0.0
    assert z(z.eps0 - 1e-12) == pytest.approx(0.0, abs=1e-6)
    assert z(z.eps0 + 0.01) == 0.0


def test_fit_round_trip_recovers_eps_max():
    spec = flexor_spec()
    data = synthetic_tensile_data(spec, [p * 1e3 for p in TENSILE_TABLE])
    fit = fit_force_curves(data)
    for P, em in fit.eps_max().items():
        assert em == pytest.approx(spec.eps_max(P), abs=0.005)
    for P, curve in fit.curves.items():
        assert curve.rms < 0.5


def test_identify_spec_table3_band():
    spec = flexor_spec()
    data = synthetic_tensile_data(spec, [p * 1e3 for p in TENSILE_TABLE])
    out = identify_spec(fit_force_curves(data), MEASURED_L0, MEASURED_R0)
    assert len(out.eps_max_by_pressure) == 5
    for P, r in out.r0_by_pressure:
        assert 0.0119 - 5e-4 <= r <= 0.0127 + 5e-4
        assert r == pytest.approx(spec.radius(P), abs=5e-4)
    assert out.measured_r0 == 0.0102
    assert out.measured_L0 == 0.34


def test_identify_spec_no_crossing():
    flat = PolynomialForceFit(1e5, np.polynomial.Polynomial([5.0]), (0.0, 0.3), 0.0)
    flat2 = PolynomialForceFit(2e5, np.polynomial.Polynomial([5.0, -1.0]), (0.0, 0.3), 0.0)
    with pytest.raises(FitError):
        identify_spec(ForceCurveFit({1e5: flat, 2e5: flat2}), 0.3, 0.01, eps0=0.1)


def test_identify_spec_needs_two_pressures():
    spec = flexor_spec()
    data = synthetic_tensile_data(spec, [137e3])
    with pytest.raises(FitError):
        identify_spec(fit_force_curves(data), 0.34, 0.0102, eps0=0.153)
