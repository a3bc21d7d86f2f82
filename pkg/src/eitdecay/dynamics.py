"""Second-moment dynamics of the three coupled modes (A, C_k, a).

The Heisenberg equations are linear, dv/dt = K v with v = (A, C_k, a), so
normal-ordered moments S[i, j] = <v_i^dag v_j> evolve as

    S(t) = conj(M(t)) @ S(0) @ M(t).T,   M(t) = exp(K t).

Langevin noise drops out of normal-ordered moments for a vacuum bath, so
this is exact; :mod:`eitdecay.oracle` checks it against a density-matrix
calculation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad, solve_ivp

from eitdecay.rates import RateBreakdown

A, C, P = 0, 1, 2  # mode indices: excited atom, |C,k> excitation, probe photon

EIGEN_CONDITION_LIMIT = 1e8


class IntegrationError(RuntimeError):
    pass


class InfiniteStorageTime(ValueError):
    """Raised when the decay rate vanishes and the storage time is unbounded."""


class CrossingNotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class CouplingConfig:
    """Couplings (rad/s), decay rates (s^-1) and photon number.

    The mixing angle is derived: tan(theta) = g_root_N0 / omega. Use
    :meth:`from_theta` to make theta the primary input instead.

    ``gamma_A_on_excited_state`` puts the gamma_A/2 damping on the A
    equation (spontaneous emission from |A>). Set it to False to damp the
    photon equation instead.
    """

    omega: float
    g_root_N0: float
    gamma_A: float = 0.0
    gamma_C: float = 0.0
    photon_number_n: float = 1.0
    gamma_A_on_excited_state: bool = True

    def __post_init__(self):
        for name in ("omega", "g_root_N0", "gamma_A", "gamma_C", "photon_number_n"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.omega == 0 and self.g_root_N0 == 0:
            raise ValueError("omega and g_root_N0 cannot both vanish (theta undefined)")

    @property
    def theta(self) -> float:
        return math.atan2(self.g_root_N0, self.omega)

    @classmethod
    def from_theta(
        cls,
        theta: float,
        *,
        omega: float | None = None,
        g_root_N0: float | None = None,
        **kwargs,
    ) -> "CouplingConfig":
        """Build a config from the mixing angle holding one coupling fixed.

        At the end point where the other coupling would diverge (theta = pi/2
        with omega held, theta = 0 with g held) the held coupling is set to
        zero instead; the dark-state dynamics are the same in that limit.
        """
        if not 0 <= theta <= math.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2], got {theta!r}")
        if (omega is None) == (g_root_N0 is None):
            raise ValueError("hold exactly one of omega or g_root_N0 fixed")
        if omega is not None:
            if math.isclose(theta, math.pi / 2, rel_tol=0, abs_tol=1e-15):
                return cls(omega=0.0, g_root_N0=omega, **kwargs)
            return cls(omega=omega, g_root_N0=omega * math.tan(theta), **kwargs)
        if theta == 0:
            return cls(omega=g_root_N0, g_root_N0=0.0, **kwargs)
        return cls(omega=g_root_N0 / math.tan(theta), g_root_N0=g_root_N0, **kwargs)

    def with_theta(self, theta: float) -> "CouplingConfig":
        """Same decays and photon number, omega held, new mixing angle."""
        kwargs = dict(
            gamma_A=self.gamma_A,
            gamma_C=self.gamma_C,
            photon_number_n=self.photon_number_n,
            gamma_A_on_excited_state=self.gamma_A_on_excited_state,
        )
        return CouplingConfig.from_theta(theta, omega=self.omega, **kwargs)


@dataclass
class MomentMatrix:
    """Normal-ordered second moments ``matrix[i, j] = <v_i^dag v_j>``."""

    matrix: np.ndarray
    time: float = 0.0

    @property
    def n_A(self) -> float:
        return float(self.matrix[A, A].real)

    @property
    def n_C(self) -> float:
        return float(self.matrix[C, C].real)

    @property
    def n_p(self) -> float:
        return float(self.matrix[P, P].real)

    def check(self, tol: float = 1e-10) -> None:
        """Raise ValueError unless the matrix is Hermitian and PSD."""
        m = self.matrix
        scale = max(float(np.abs(m).max()), 1e-300)
        if np.abs(m - m.conj().T).max() > tol * scale:
            raise ValueError("moment matrix is not Hermitian")
        evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if evals.min() < -tol * max(float(np.trace(m).real), 1e-300):
            raise ValueError(f"moment matrix is not positive semidefinite (min eig {evals.min():.3g})")


@dataclass
class EvolutionResult:
    times: np.ndarray
    moments: np.ndarray  # (len(times), 3, 3) complex
    method: str = "eigen"
    theta: np.ndarray | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")

    @property
    def n_A(self) -> np.ndarray:
        return self.moments[:, A, A].real

    @property
    def n_C(self) -> np.ndarray:
        return self.moments[:, C, C].real

    @property
    def n_p(self) -> np.ndarray:
        return self.moments[:, P, P].real

    @property
    def stored_sum(self) -> np.ndarray:
        """n_p + n_C, the photons plus stored excitations."""
        return self.n_p + self.n_C

    def at(self, index: int) -> MomentMatrix:
        return MomentMatrix(self.moments[index], float(self.times[index]))


def dark_state_moments(cfg: CouplingConfig) -> MomentMatrix:
    """Moments of the n-photon dark state: all quanta in cos(theta) a - sin(theta) C."""
    th = cfg.theta
    u = np.array([0.0, -math.sin(th), math.cos(th)], dtype=complex)
    return MomentMatrix(cfg.photon_number_n * np.outer(u.conj(), u))


def drift_matrix(cfg: CouplingConfig) -> np.ndarray:
    """Drift matrix K of dv/dt = K v for v = (A, C_k, a)."""
    K = np.zeros((3, 3), dtype=complex)
    K[A, C] = K[C, A] = -1j * cfg.omega
    K[A, P] = K[P, A] = -1j * cfg.g_root_N0
    K[C, C] = -0.5 * cfg.gamma_C
    if cfg.gamma_A_on_excited_state:
        K[A, A] = -0.5 * cfg.gamma_A
    else:
        K[P, P] = -0.5 * cfg.gamma_A
    return K


class _EigenPropagator:
    """exp(K t) through the eigendecomposition of a diagonalizable K."""

    def __init__(self, K: np.ndarray):
        self.evals, self.V = np.linalg.eig(K)
        self.condition = float(np.linalg.cond(self.V))
        self.Vinv = np.linalg.inv(self.V) if self.condition < EIGEN_CONDITION_LIMIT else None

    @property
    def usable(self) -> bool:
        return self.Vinv is not None

    def __call__(self, t: float) -> np.ndarray:
        return (self.V * np.exp(self.evals * t)) @ self.Vinv


def _propagate_moments(S0: np.ndarray, M: np.ndarray) -> np.ndarray:
    S = M.conj() @ S0 @ M.T
    return 0.5 * (S + S.conj().T)


def _integrate_propagator(K_of_t, t_eval, t0: float = 0.0, M0=None, rtol=1e-12, atol=1e-13):
    """Propagators M(t) for dM/dt = K(t) M, sampled at ``t_eval``."""
    M0 = np.eye(3, dtype=complex) if M0 is None else M0

    def rhs(t, y):
        return (K_of_t(t) @ y.reshape(3, 3)).ravel()

    t_eval = np.asarray(t_eval, dtype=float)
    t_end = float(t_eval[-1])
    if t_end == t0:
        return np.repeat(M0[None], len(t_eval), axis=0)
    sol = solve_ivp(rhs, (t0, t_end), M0.ravel(), method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegrationError(f"propagator integration failed: {sol.message}")
    return sol.y.T.reshape(-1, 3, 3)


def evolve_moments(
    S0: MomentMatrix,
    K: np.ndarray,
    t_grid,
    *,
    cross_check: bool = False,
) -> EvolutionResult:
    """Evolve moments under a constant drift matrix.

    The eigendecomposition path is used unless the eigenbasis is
    ill-conditioned, in which case the Runge-Kutta path takes over
    (``result.method == "integrator"``). With ``cross_check`` both paths
    run and their largest relative trace discrepancy is stored in
    ``result.notes["cross_check"]``.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if times[0] < 0:
        raise ValueError("t_grid must start at t >= 0")
    S_init = np.asarray(S0.matrix, dtype=complex)
    prop = _EigenPropagator(K)

    def via_integrator():
        return _integrate_propagator(lambda _t: K, times)

    if prop.usable:
        Ms = np.array([prop(t) for t in times])
        method = "eigen"
    else:
        Ms = via_integrator()
        method = "integrator"
    moments = np.array([_propagate_moments(S_init, M) for M in Ms])
    result = EvolutionResult(times, moments, method=method)
    result.notes["eigen_condition"] = prop.condition

    if cross_check:
        other = via_integrator() if method == "eigen" else np.array([prop(t) for t in times]) if prop.usable else None
        if other is not None:
            other_moments = np.array([_propagate_moments(S_init, M) for M in other])
            tr = np.trace(moments, axis1=1, axis2=2).real
            tr_other = np.trace(other_moments, axis1=1, axis2=2).real
            scale = max(float(np.abs(S_init).max()), 1e-300)
            result.notes["cross_check"] = float(np.max(np.abs(tr - tr_other)) / scale)
            result.notes["cross_check_populations"] = float(
                np.max(np.abs(np.diagonal(moments - other_moments, axis1=1, axis2=2))) / scale
            )
    return result


def stored_sum_at(cfg: CouplingConfig, t: float) -> float:
    """n_p + n_C at one time, starting from the dark state."""
    res = evolve_moments(dark_state_moments(cfg), drift_matrix(cfg), [t])
    return float(res.stored_sum[0])


def delay_time_tau_d(
    cfg: CouplingConfig,
    fraction: float = math.exp(-1.0),
    *,
    rtol: float = 1e-6,
    scan_points: int = 64,
) -> float:
    """First time at which n_p + n_C drops below ``fraction * n``.

    The time axis is bracketed by doubling from 1e-3/gamma_C, the bracket is
    scanned on a uniform subgrid for the first sign change, then bisected.
    """
    if not cfg.gamma_C > 0:
        raise ValueError("delay time needs gamma_C > 0")
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    if cfg.photon_number_n <= 0:
        raise ValueError("photon number must be positive")
    S0 = dark_state_moments(cfg)
    prop = _EigenPropagator(drift_matrix(cfg))
    target = fraction * cfg.photon_number_n

    if prop.usable:
        def excess(t):
            S = _propagate_moments(S0.matrix, prop(t))
            return float(S[P, P].real + S[C, C].real) - target
    else:
        K = drift_matrix(cfg)

        def excess(t):
            M = _integrate_propagator(lambda _t: K, [t])[0]
            S = _propagate_moments(S0.matrix, M)
            return float(S[P, P].real + S[C, C].real) - target

    t_max = 1e3 / cfg.gamma_C
    lo, hi = 0.0, 1e-3 / cfg.gamma_C
    while excess(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if lo > t_max:
            raise CrossingNotFound(f"n_p + n_C stays above {fraction:.3g} n up to {t_max:.3g} s")
    grid = np.linspace(lo, hi, scan_points + 1)
    for a, b in zip(grid[:-1], grid[1:]):
        if excess(b) <= 0:
            lo, hi = float(a), float(b)
            break
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def storage_time_tau_s(rate: RateBreakdown | float) -> float:
    """Maximum storage time 1/gamma_C in s."""
    total = rate.total if isinstance(rate, RateBreakdown) else float(rate)
    if total < 0:
        raise ValueError(f"decay rate must be non-negative, got {total!r}")
    if total == 0:
        raise InfiniteStorageTime("zero decay rate: storage time is unbounded")
    return 1.0 / total


def theta_sweep(cfg_base: CouplingConfig, theta_grid, t_list, *, threads: int = 1) -> np.ndarray:
    """n_p + n_C from the dark state, shape ``(len(theta_grid), len(t_list))``.

    Omega is held at ``cfg_base.omega`` and g sqrt(N0) = Omega tan(theta).
    """
    thetas = [float(th) for th in theta_grid]
    times = np.asarray(t_list, dtype=float)
    if cfg_base.omega <= 0:
        raise ValueError("theta sweep holds omega fixed; omega must be positive")

    def row(theta):
        cfg = cfg_base.with_theta(theta)
        return evolve_moments(dark_state_moments(cfg), drift_matrix(cfg), times).stored_sum

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(row, thetas))
    else:
        rows = [row(th) for th in thetas]
    return np.array(rows).reshape(len(thetas), times.size)


@dataclass(frozen=True)
class Ramp:
    """Storage sequence: theta goes theta0 -> pi/2 in ``t_on``, holds, returns in ``t_off``.

    ``shape`` is ``"linear"`` or ``"smooth"`` (half-cosine in time).
    """

    t_on: float
    t_hold: float
    t_off: float
    shape: str = "smooth"

    def __post_init__(self):
        if not (self.t_on > 0 and self.t_hold > 0 and self.t_off > 0):
            raise ValueError("ramp times must be positive")
        if self.shape not in ("linear", "smooth"):
            raise ValueError(f"unknown ramp shape {self.shape!r}")

    @property
    def duration(self) -> float:
        return self.t_on + self.t_hold + self.t_off

    def progress(self, s: float) -> float:
        s = min(max(s, 0.0), 1.0)
        return s if self.shape == "linear" else 0.5 * (1.0 - math.cos(math.pi * s))

    def theta(self, t: float, theta0: float) -> float:
        if t <= self.t_on:
            frac = self.progress(t / self.t_on)
        elif t <= self.t_on + self.t_hold:
            frac = 1.0
        else:
            frac = 1.0 - self.progress((t - self.t_on - self.t_hold) / self.t_off)
        return theta0 + (0.5 * math.pi - theta0) * frac


def storage_protocol(cfg: CouplingConfig, ramp: Ramp, *, points_per_phase: int = 50) -> EvolutionResult:
    """Stop and retrieve the probe by ramping omega = g sqrt(N0) cot(theta(t)).

    ``cfg.theta`` is the starting (and final) mixing angle, and the initial
    moments are those of its dark state. The ramps are integrated with an
    adaptive Runge-Kutta method; the hold (omega = 0) is propagated exactly.
    ``result.notes`` carries the recovered photon number and fractions.
    """
    theta0 = cfg.theta
    g = cfg.g_root_N0
    if not (g > 0 and cfg.omega > 0):
        raise ValueError("storage protocol needs omega > 0 and g_root_N0 > 0 at the start")
    S0 = dark_state_moments(cfg).matrix
    base = drift_matrix(replace(cfg, omega=0.0, g_root_N0=g))

    def K_of_t(t):
        th = ramp.theta(t, theta0)
        K = base.copy()
        omega = g * math.cos(th) / math.sin(th)
        K[A, C] = K[C, A] = -1j * omega
        return K

    t1 = ramp.t_on
    t2 = ramp.t_on + ramp.t_hold
    t3 = ramp.duration
    grid_on = np.linspace(0.0, t1, points_per_phase + 1)
    grid_hold = np.linspace(t1, t2, points_per_phase + 1)[1:]
    grid_off = np.linspace(t2, t3, points_per_phase + 1)[1:]

    M_on = _integrate_propagator(K_of_t, grid_on)
    hold = _EigenPropagator(base)
    if hold.usable:
        M_hold = np.array([hold(t - t1) @ M_on[-1] for t in grid_hold])
    else:
        M_hold = _integrate_propagator(lambda _t: base, grid_hold, t0=t1, M0=M_on[-1])
    M_off = _integrate_propagator(K_of_t, grid_off, t0=t2, M0=M_hold[-1])

    times = np.concatenate([grid_on, grid_hold, grid_off])
    Ms = np.concatenate([M_on, M_hold, M_off])
    moments = np.array([_propagate_moments(S0, M) for M in Ms])
    result = EvolutionResult(
        times,
        moments,
        method="piecewise",
        theta=np.array([ramp.theta(t, theta0) for t in times]),
    )
    n = cfg.photon_number_n
    result.notes.update(
        recovered_photons=float(result.n_p[-1]),
        recovered_fraction=float(result.stored_sum[-1] / n) if n > 0 else float("nan"),
    )
    return result


def adiabatic_stored_fraction(cfg: CouplingConfig, ramp: Ramp) -> float:
    """exp(-gamma_C * integral of sin^2 theta(t) dt): the adiabatic-following estimate."""
    theta0 = cfg.theta
    t2 = ramp.t_on + ramp.t_hold

    def s2(t):
        return math.sin(ramp.theta(t, theta0)) ** 2

    exposure = quad(s2, 0.0, ramp.t_on)[0] + ramp.t_hold + quad(s2, t2, ramp.duration)[0]
    return math.exp(-cfg.gamma_C * exposure)
