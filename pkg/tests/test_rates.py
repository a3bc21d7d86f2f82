import math

import numpy as np
import pytest

from eitdecay.constants import HBAR
from eitdecay.gas import ReducedPoint, reduced_temperature
from eitdecay.rates import (
    QuadratureError,
    QuadratureSettings,
    beliaev_rate,
    golden_section,
    kinetic_theory_rate,
    landau_rate,
    low_k_asymptote,
    minimize_rate_over_k,
    rate_t0_closed_form,
    total_rate,
)

# Frozen from a 30-digit mpmath tanh-sinh evaluation of the raw integrands
# (Bose functions via mp.expm1, Landau range taken to infinity).
MP_T0_Y1 = 6.12821088028641499502635189801
MP_HALF = {  # T/Tc = 0.5, optical splitting
    0.1: (0.0473355412300263891997666221993, 1995.66157238991109328073528241),
    1.0: (38.7729835312939651378977418152, 199.566157238991109328073528241),
}
MP_TENTH_Y005 = {  # T/Tc = 0.1, y_k = 0.05
    1e-4: (0.00587382579280671990404194188656, 1.17766316194935058357082630809),
    1e-2: (0.001368196711399076147944425779, 5.47067963478456858150388287217),
    1e2: (0.00118369940801801720101697292825, 193.228348440744328037850360714),
}


def _antiderivative_rate(gas, y):
    # integral_0^{y^2} (1 - 1/sqrt(1+z^2)) dz = y^2 - asinh(y^2)
    return gas.prefactor / y * (y * y - math.asinh(y * y))


def test_beliaev_t0_matches_antiderivative(gas):
    pt = ReducedPoint(1.0, 0.0, gas.z_CB)
    assert beliaev_rate(gas, pt) == pytest.approx(MP_T0_Y1, rel=1e-12)
    assert beliaev_rate(gas, pt) == pytest.approx(_antiderivative_rate(gas, 1.0), rel=1e-12)


@pytest.mark.parametrize("y", [0.01, 0.1, 0.5, 1, 2, 10, 50])
def test_quadrature_closed_form_identity(gas, y):
    quad_value = beliaev_rate(gas, ReducedPoint(y, 0.0, gas.z_CB))
    closed = rate_t0_closed_form(gas, y)
    assert abs(quad_value - closed) / closed < 1e-6


def test_beliaev_small_y_quintic(gas):
    r1 = beliaev_rate(gas, ReducedPoint(0.01, 0.0, 1.0))
    r2 = beliaev_rate(gas, ReducedPoint(0.02, 0.0, 1.0))
    assert r2 / r1 == pytest.approx(32.0, rel=1e-3)


@pytest.mark.parametrize("y", [0.1, 1.0])
def test_finite_temperature_against_mpmath(gas, t_half, y):
    pt = ReducedPoint(y, t_half, gas.z_CB)
    b, l = MP_HALF[y]
    assert beliaev_rate(gas, pt) == pytest.approx(b, rel=1e-8)
    assert landau_rate(gas, pt) == pytest.approx(l, rel=1e-8)


@pytest.mark.parametrize("z_CB", sorted(MP_TENTH_Y005))
def test_small_splitting_against_mpmath(gas, t_tenth, z_CB):
    pt = ReducedPoint(0.05, t_tenth, z_CB)
    b, l = MP_TENTH_Y005[z_CB]
    assert beliaev_rate(gas, pt) == pytest.approx(b, rel=1e-8)
    assert landau_rate(gas, pt) == pytest.approx(l, rel=1e-8)


def test_landau_zero_at_zero_temperature(gas):
    for y in (0.01, 1.0, 30.0):
        assert landau_rate(gas, ReducedPoint(y, 0.0, gas.z_CB)) == 0.0


def test_total_is_exact_sum(gas, t_half):
    r = total_rate(gas, ReducedPoint(0.3, t_half, gas.z_CB))
    assert r.total == r.beliaev + r.landau
    assert 0 <= r.quadrature_error_estimate < 1e-6 * max(r.total, gas.prefactor)
    r0 = total_rate(gas, ReducedPoint(0.3, 0.0, gas.z_CB))
    assert r0.total == r0.beliaev


def test_storage_rates_half_tc(gas, t_half):
    assert total_rate(gas, ReducedPoint(1.0, t_half, gas.z_CB)).total == pytest.approx(244, rel=0.15)
    assert total_rate(gas, ReducedPoint(0.1, t_half, gas.z_CB)).total == pytest.approx(2.0e3, rel=0.15)


def test_channels_positive_on_grid(gas):
    for y in (0.02, 0.2, 2.0):
        for t in (0.1, 1.0, 5.0):
            for z in (1e-4, 1e-1, 1e3):
                pt = ReducedPoint(y, t, z)
                assert beliaev_rate(gas, pt) >= 0
                assert landau_rate(gas, pt) > 0


def test_rate_increases_with_temperature(gas):
    ts = [0.05, 0.2, 0.5, 1.0, 2.0, 4.0]
    for y in (0.05, 0.5, 3.0):
        totals = [total_rate(gas, ReducedPoint(y, t, gas.z_CB)).total for t in ts]
        assert np.all(np.diff(totals) > 0)


def test_splitting_dependence_at_low_k(gas, t_tenth):
    zs = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2]
    landau = [landau_rate(gas, ReducedPoint(0.05, t_tenth, z)) for z in zs]
    beliaev = [beliaev_rate(gas, ReducedPoint(0.05, t_tenth, z)) for z in zs]
    assert np.all(np.diff(landau) > 0)
    assert np.all(np.diff(beliaev) <= 0)


@pytest.mark.parametrize("y", [0.05, 0.5, 5.0])
def test_large_splitting_saturation(gas, t_tenth, y):
    pt = ReducedPoint(y, t_tenth, 10.0)
    full = total_rate(gas, pt).total
    bare = total_rate(gas, pt, include_c_population=False).total
    assert abs(full - bare) / full < 1e-3


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_landau_cutoff_robust(gas, t):
    pt = ReducedPoint(0.3, t, 0.5)
    base = landau_rate(gas, pt)
    doubled = landau_rate(gas, pt, QuadratureSettings(landau_cutoff_multiplier=120))
    assert abs(doubled - base) / base < 1e-8


def test_quadrature_failure_is_explicit(gas, t_tenth):
    q = QuadratureSettings(relative_tolerance=1e-14, absolute_tolerance_scale=1e-300, max_subdivisions=1)
    with pytest.raises(QuadratureError) as info:
        beliaev_rate(gas, ReducedPoint(3.0, t_tenth, 1e-4), q)
    assert info.value.error_estimate >= 0


def test_quadrature_settings_validation():
    with pytest.raises(ValueError):
        QuadratureSettings(relative_tolerance=0)
    with pytest.raises(ValueError):
        QuadratureSettings(landau_cutoff_multiplier=5)


def test_closed_form_sodium_value(gas):
    assert rate_t0_closed_form(gas, 1.0) == pytest.approx(MP_T0_Y1, rel=1e-14)
    # series and direct branches meet smoothly
    y = math.sqrt(1e-3)
    below = rate_t0_closed_form(gas, y * (1 - 1e-12))
    above = rate_t0_closed_form(gas, y * (1 + 1e-12))
    assert above == pytest.approx(below, rel=1e-9)


def test_kinetic_theory_rate(gas):
    k0 = gas.k0
    assert kinetic_theory_rate(gas, k0) == pytest.approx(gas.prefactor, rel=1e-13)
    assert kinetic_theory_rate(gas, k0) == pytest.approx(51.6, rel=2e-3)
    assert kinetic_theory_rate(gas, 2 * k0) == pytest.approx(2 * kinetic_theory_rate(gas, k0), rel=1e-15)
    heavier = type(gas)(2 * gas.scattering_length_a, gas.atom_mass_m, gas.density_n0, None, 1.0)
    assert kinetic_theory_rate(heavier, k0) == pytest.approx(4 * kinetic_theory_rate(gas, k0), rel=1e-15)


def test_low_k_asymptote(gas):
    k0 = gas.k0
    assert low_k_asymptote(gas, k0) == pytest.approx(HBAR * k0**5 / (96 * gas.atom_mass_m * math.pi * gas.density_n0))
    assert low_k_asymptote(gas, 2 * k0) == pytest.approx(32 * low_k_asymptote(gas, k0), rel=1e-14)
    ratio = rate_t0_closed_form(gas, 0.02) / low_k_asymptote(gas, 0.02 * k0)
    assert 0.98 <= ratio <= 1.02


def test_high_k_kinetic_limit(gas):
    k = 50 * gas.k0
    assert rate_t0_closed_form(gas, 50) / kinetic_theory_rate(gas, k) == pytest.approx(1.0, abs=0.01)


def test_golden_section_on_parabola():
    x, fx = golden_section(lambda s: (s - 0.3) ** 2 + 1, -1.0, 2.0, 1e-8)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(1.0)


def test_minimizer_boundary_at_zero_temperature(gas):
    res = minimize_rate_over_k(gas, 0.0, gas.z_CB, (0.01, 10.0))
    assert not res.interior
    assert res.y_star == 0.01
    assert res.note == "no interior minimum"


def test_minimizer_interior_and_temperature_trend(gas):
    ys = []
    for frac in (0.1, 0.2, 0.5):
        res = minimize_rate_over_k(gas, reduced_temperature(gas, frac), gas.z_CB)
        assert res.interior
        ys.append(res.y_star)
        # refined point is no worse than its neighbours at +-1%
        for f in (0.99, 1.01):
            assert res.rate.total <= total_rate(gas, ReducedPoint(res.y_star * f, res.rate.point.t, gas.z_CB)).total
    assert ys[0] < ys[1] < ys[2]


def test_minimizer_threads_deterministic(gas, t_tenth):
    a = minimize_rate_over_k(gas, t_tenth, 1e2, threads=1)
    b = minimize_rate_over_k(gas, t_tenth, 1e2, threads=4)
    assert a == b


def test_minimizer_rejects_bad_interval(gas):
    with pytest.raises(ValueError):
        minimize_rate_over_k(gas, 1.0, 1.0, (1.0, 1.0))
