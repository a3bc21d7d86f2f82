"""Homogeneous condensate: parameters, Bogoliubov dispersion, thermal occupations.

Energies are measured in units of the chemical potential mu and momenta in
units of the healing wavenumber k0 = sqrt(8 pi n0 a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from eitdecay.constants import HBAR, K_B, isotope_mass

# exp(x) overflows a double above ~709.78; occupations there are below 1e-308
_EXP_OVERFLOW = 709.0


@dataclass(frozen=True)
class CondensateParams:
    """Physical constants of the gas.

    Parameters
    ----------
    scattering_length_a : float
        s-wave scattering length in m (same for B-B and B-C collisions).
    atom_mass_m : float
        Atomic mass in kg.
    density_n0 : float
        Condensate number density in m^-3.
    critical_temp_Tc : float or None
        Critical temperature in K, used only for T/Tc conversions.
    level_splitting_eCB : float
        Internal splitting eps_CB / hbar in rad/s.
    """

    scattering_length_a: float
    atom_mass_m: float
    density_n0: float
    critical_temp_Tc: float | None
    level_splitting_eCB: float

    def __post_init__(self):
        for name in ("scattering_length_a", "atom_mass_m", "density_n0", "level_splitting_eCB"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.critical_temp_Tc is not None and not self.critical_temp_Tc > 0:
            raise ValueError(f"critical_temp_Tc must be positive, got {self.critical_temp_Tc!r}")

    @classmethod
    def from_isotope(cls, isotope: str, **kwargs) -> "CondensateParams":
        return cls(atom_mass_m=isotope_mass(isotope), **kwargs)

    @property
    def k0(self) -> float:
        """Healing wavenumber in m^-1."""
        return healing_wavenumber(self)

    @property
    def mu(self) -> float:
        """Chemical potential (hbar k0)^2 / 2m in J."""
        return (HBAR * self.k0) ** 2 / (2.0 * self.atom_mass_m)

    @property
    def omega0(self) -> float:
        """mu / hbar in rad/s."""
        return self.mu / HBAR

    @property
    def prefactor(self) -> float:
        """Rate scale a * omega0 * k0 in s^-1."""
        return self.scattering_length_a * self.omega0 * self.k0

    @property
    def z_CB(self) -> float:
        return self.level_splitting_eCB / self.omega0


@dataclass(frozen=True)
class ReducedPoint:
    """Dimensionless evaluation point: y_k = k/k0, t = k_B T/mu, z_CB = eps_CB/mu."""

    y_k: float
    t: float
    z_CB: float

    def __post_init__(self):
        if not self.y_k > 0:
            raise ValueError(f"y_k must be positive, got {self.y_k!r}")
        if not self.t >= 0:
            raise ValueError(f"t must be non-negative, got {self.t!r}")
        if not self.z_CB > 0:
            raise ValueError(f"z_CB must be positive, got {self.z_CB!r}")

    @property
    def z_k(self) -> float:
        """Free-particle energy of the excited C mode, y_k**2."""
        return self.y_k * self.y_k


def healing_wavenumber(params: CondensateParams) -> float:
    return math.sqrt(8.0 * math.pi * params.density_n0 * params.scattering_length_a)


def bogoliubov_energy(y: float) -> float:
    """Quasiparticle energy y * sqrt(2 + y^2) in units of mu."""
    if y < 0:
        raise ValueError(f"momentum must be non-negative, got {y!r}")
    return y * math.sqrt(2.0 + y * y)


def bose_population(z: float, t: float) -> float:
    """Bose-Einstein occupation 1/(exp(z/t) - 1).

    Returns 0 at t = 0 for z > 0. The z = 0, t > 0 pole is returned as
    ``math.inf`` on purpose; callers multiplying by a vanishing matrix
    element must take the limit themselves.
    """
    if z < 0:
        raise ValueError(f"energy must be non-negative, got {z!r}")
    if t < 0:
        raise ValueError(f"temperature must be non-negative, got {t!r}")
    if z == 0:
        if t == 0:
            raise ValueError("occupation undefined at z = 0, t = 0")
        return math.inf
    if t == 0:
        return 0.0
    x = z / t
    if x > _EXP_OVERFLOW:
        return 0.0
    return 1.0 / math.expm1(x)


def reduce(
    params: CondensateParams,
    k: float,
    T: float | None = None,
    *,
    T_over_Tc: float | None = None,
) -> ReducedPoint:
    """Convert a wavenumber (m^-1) and a temperature to a :class:`ReducedPoint`.

    Give exactly one of ``T`` (kelvin) or ``T_over_Tc``.
    """
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    if (T is None) == (T_over_Tc is None):
        raise ValueError("give exactly one of T or T_over_Tc")
    if T_over_Tc is not None:
        if params.critical_temp_Tc is None:
            raise ValueError("T_over_Tc given but critical_temp_Tc is not set")
        T = T_over_Tc * params.critical_temp_Tc
    if T < 0:
        raise ValueError(f"temperature must be non-negative, got {T!r}")
    return ReducedPoint(y_k=k / params.k0, t=K_B * T / params.mu, z_CB=params.z_CB)


def reduced_temperature(params: CondensateParams, T_over_Tc: float) -> float:
    if params.critical_temp_Tc is None:
        raise ValueError("critical_temp_Tc is not set")
    if T_over_Tc < 0:
        raise ValueError(f"T/Tc must be non-negative, got {T_over_Tc!r}")
    return K_B * T_over_Tc * params.critical_temp_Tc / params.mu


def unreduce(params: CondensateParams, pt: ReducedPoint) -> tuple[float, float]:
    """Inverse of :func:`reduce`: returns ``(k, T)`` in SI units."""
    return pt.y_k * params.k0, pt.t * params.mu / K_B
