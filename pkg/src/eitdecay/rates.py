"""Beliaev and Landau collisional decay rates of the |C,k> mode.

Both channels are one-dimensional integrals over the Bogoliubov energy of
the partner quasiparticle, weighted by the matrix element
1 - 1/sqrt(1 + z^2) and by Bose occupations. They are evaluated with
QUADPACK's adaptive Gauss-Kronrod rule (``scipy.integrate.quad``); the
zero-temperature Beliaev integral has the closed form used as its oracle.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from eitdecay.constants import HBAR
from eitdecay.gas import CondensateParams, ReducedPoint, bose_population

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, error_estimate: float):
        super().__init__(f"{message} (value {estimate:.6g}, error estimate {error_estimate:.3g})")
        self.estimate = estimate
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureSettings:
    relative_tolerance: float = 1e-9
    absolute_tolerance_scale: float = 1e-12
    landau_cutoff_multiplier: float = 60.0
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance_scale > 0):
            raise ValueError("quadrature tolerances must be positive")
        if not self.landau_cutoff_multiplier >= 10:
            raise ValueError("landau_cutoff_multiplier must be >= 10")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSettings()


@dataclass(frozen=True)
class RateBreakdown:
    """Decay rates at one point, in s^-1."""

    beliaev: float
    landau: float
    point: ReducedPoint
    quadrature_error_estimate: float = 0.0

    @property
    def total(self) -> float:
        return self.beliaev + self.landau


@dataclass(frozen=True)
class MinimizationResult:
    y_star: float
    rate: RateBreakdown
    interior: bool

    @property
    def note(self) -> str:
        return "interior minimum" if self.interior else "no interior minimum"


def _matrix_element(z: float) -> float:
    # 1 - 1/sqrt(1+z^2) loses all digits for small z
    s = math.sqrt(1.0 + z * z)
    if z < 1e-3:
        return z * z / (s * (1.0 + s))
    return 1.0 - 1.0 / s


def _occupation(z: float, t: float) -> float:
    return 0.0 if t == 0 else bose_population(z, t)


def _integrate(func, lo, hi, q: QuadratureSettings, epsabs: float, points=None, what=""):
    pts = None
    if points:
        pts = sorted({p for p in points if lo < p < hi})
    out = quad(
        func,
        lo,
        hi,
        epsabs=epsabs,
        epsrel=q.relative_tolerance,
        limit=max(q.max_subdivisions, len(pts or ()) + 1),
        points=pts or None,
        full_output=1,
    )
    value, err = out[0], out[1]
    if len(out) == 4:
        raise QuadratureError(f"{what} quadrature failed: {out[3].splitlines()[0]}", value, err)
    return value, err


def _check_error(value: float, err: float, params: CondensateParams, what: str):
    if not math.isfinite(value) or err >= 1e-6 * max(abs(value), params.prefactor):
        raise QuadratureError(f"{what} error estimate above contract", value, err)


def _beliaev(params, pt, q, include_c_population):
    y2, t, zcb = pt.z_k, pt.t, pt.z_CB

    def integrand(z):
        if t == 0:
            return _matrix_element(z)
        if z == 0:
            return 0.0
        n_c = _occupation(y2 + zcb - z, t) if include_c_population else 0.0
        return _matrix_element(z) * (1.0 + n_c + _occupation(z, t))

    # n_C(y^2 + z_CB - z) spikes like t/(z_CB + y^2 - z) at the upper end
    points = [y2 - zcb * 10.0**j for j in range(4)] if t > 0 else None
    epsabs = q.absolute_tolerance_scale * pt.y_k
    value, err = _integrate(integrand, 0.0, y2, q, epsabs, points, "beliaev")
    scale = params.prefactor / pt.y_k
    return scale * value, scale * err


def _landau(params, pt, q, include_c_population):
    y2, t, zcb = pt.z_k, pt.t, pt.z_CB
    if t == 0:
        return 0.0, 0.0

    def integrand(z):
        if z == 0:
            return 0.0
        n_c = _occupation(y2 + zcb + z, t) if include_c_population else 0.0
        return _matrix_element(z) * (_occupation(z, t) - n_c)

    z_max = q.landau_cutoff_multiplier * max(1.0, t)
    epsabs = q.absolute_tolerance_scale * pt.y_k
    value, err = _integrate(integrand, 0.0, z_max, q, epsabs, [t, 10.0 * t], "landau")
    # integrand <= n_B(z) <= 2 exp(-z/t) once z/t >= ln 2
    tail = 2.0 * t * math.exp(-z_max / t)
    scale = params.prefactor / pt.y_k
    return scale * value, scale * (err + tail)


def beliaev_rate(
    params: CondensateParams,
    pt: ReducedPoint,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    *,
    include_c_population: bool = True,
) -> float:
    """Beliaev-channel decay rate in s^-1.

    ``include_c_population=False`` drops the n_C occupation, which is the
    large-splitting limit.
    """
    value, err = _beliaev(params, pt, q, include_c_population)
    _check_error(value, err, params, "beliaev")
    return value


def landau_rate(
    params: CondensateParams,
    pt: ReducedPoint,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    *,
    include_c_population: bool = True,
) -> float:
    """Landau-channel decay rate in s^-1; exactly zero at t = 0."""
    value, err = _landau(params, pt, q, include_c_population)
    _check_error(value, err, params, "landau")
    return value


def total_rate(
    params: CondensateParams,
    pt: ReducedPoint,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    *,
    include_c_population: bool = True,
) -> RateBreakdown:
    b, b_err = _beliaev(params, pt, q, include_c_population)
    l, l_err = _landau(params, pt, q, include_c_population)
    _check_error(b, b_err, params, "beliaev")
    _check_error(l, l_err, params, "landau")
    return RateBreakdown(beliaev=b, landau=l, point=pt, quadrature_error_estimate=b_err + l_err)


def rate_t0_closed_form(params: CondensateParams, y_k: float) -> float:
    """Zero-temperature rate P*y*(1 - asinh(y^2)/y^2), in s^-1."""
    if not y_k > 0:
        raise ValueError(f"y_k must be positive, got {y_k!r}")
    u = y_k * y_k
    if u < 1e-3:
        # u - asinh(u) = u^3/6 - 3u^5/40 + 15u^7/336 - ...; the direct form cancels
        bracket = u**2 / 6.0 - 3.0 * u**4 / 40.0 + 15.0 * u**6 / 336.0
    else:
        bracket = 1.0 - math.asinh(u) / u
    return params.prefactor * y_k * bracket


def kinetic_theory_rate(params: CondensateParams, k: float) -> float:
    """Classical n0 * sigma * v with sigma = 4 pi a^2 and v = hbar k / m."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    sigma = 4.0 * math.pi * params.scattering_length_a**2
    return params.density_n0 * sigma * HBAR * k / params.atom_mass_m


def low_k_asymptote(params: CondensateParams, k: float) -> float:
    """hbar k^5 / (96 m pi n0), the phonon-regime limit of the T = 0 rate."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    return HBAR * k**5 / (96.0 * params.atom_mass_m * math.pi * params.density_n0)


def golden_section(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on [a, b]; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def minimize_rate_over_k(
    params: CondensateParams,
    t: float,
    z_CB: float,
    search_interval: tuple[float, float] = (1e-2, 10.0),
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    *,
    grid_points: int = 64,
    y_rtol: float = 1e-4,
    threads: int = 1,
) -> MinimizationResult:
    """Find the momentum y_k minimizing the total rate.

    A logarithmic grid brackets the minimum, golden-section search in log y
    refines it. If the smallest grid value sits on an end of the interval
    the end point is returned with ``interior=False``.
    """
    y_lo, y_hi = search_interval
    if not 0 < y_lo < y_hi:
        raise ValueError(f"need 0 < y_lo < y_hi, got {search_interval!r}")
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")

    def rate_at(y):
        return total_rate(params, ReducedPoint(y, t, z_CB), q)

    grid = [float(y) for y in np.geomspace(y_lo, y_hi, grid_points)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            coarse = list(pool.map(rate_at, grid))
    else:
        coarse = [rate_at(y) for y in grid]
    totals = [r.total for r in coarse]
    i = int(np.argmin(totals))
    if i == 0 or i == grid_points - 1:
        return MinimizationResult(y_star=float(grid[i]), rate=coarse[i], interior=False)

    log_y, _ = golden_section(
        lambda s: rate_at(math.exp(s)).total,
        math.log(grid[i - 1]),
        math.log(grid[i + 1]),
        math.log1p(y_rtol),
    )
    y_star = math.exp(log_y)
    return MinimizationResult(y_star=y_star, rate=rate_at(y_star), interior=True)
