"""Run configuration: flat ``section.key = value`` files, presets and overrides.

Example::

    # gas block
    gas.isotope = Na23
    gas.a_m = 2.8e-9
    gas.eCB_rad_s = 2*pi*1.8e9
    scan.T_over_Tc = 0, 0.1, 0.5

Numbers may be written as products of literals and ``pi``. Lists are
comma-separated. Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from eitdecay.constants import isotope_mass
from eitdecay.dynamics import CouplingConfig, Ramp
from eitdecay.gas import CondensateParams
from eitdecay.rates import QuadratureSettings


class ConfigError(ValueError):
    pass


FLOAT, INT, BOOL, STR, FLOATS, FLOAT_OR_AUTO = "float", "int", "bool", "str", "floats", "float|auto"

SCHEMA = {
    "gas.isotope": STR,
    "gas.mass_kg": FLOAT,
    "gas.a_m": FLOAT,
    "gas.n0_m3": FLOAT,
    "gas.Tc_K": FLOAT,
    "gas.eCB_rad_s": FLOAT,
    "coupling.omega_rad_s": FLOAT,
    "coupling.g_root_N0_rad_s": FLOAT,
    "coupling.theta_rad": FLOAT,
    "coupling.gamma_A_per_s": FLOAT,
    "coupling.gamma_C_per_s": FLOAT_OR_AUTO,
    "coupling.photon_number": FLOAT,
    "coupling.gamma_A_on_excited_state": BOOL,
    "coupling.y_k": FLOAT,
    "coupling.T_over_Tc": FLOAT,
    "scan.y_min": FLOAT,
    "scan.y_max": FLOAT,
    "scan.y_points": INT,
    "scan.y_values": FLOATS,
    "scan.T_over_Tc": FLOATS,
    "scan.z_CB": FLOATS,
    "scan.y_lo": FLOAT,
    "scan.y_hi": FLOAT,
    "scan.grid_points": INT,
    "scan.theta_points": INT,
    "scan.times_s": FLOATS,
    "scan.times_gamma_C": FLOATS,
    "scan.t_max_s": FLOAT,
    "scan.t_points": INT,
    "scan.normalize": BOOL,
    "ramp.t_on_s": FLOAT,
    "ramp.t_hold_s": FLOAT,
    "ramp.t_off_s": FLOAT,
    "ramp.shape": STR,
    "ramp.points_per_phase": INT,
    "quad.rtol": FLOAT,
    "quad.atol_scale": FLOAT,
    "quad.landau_cutoff": FLOAT,
    "quad.max_subdivisions": INT,
}

TWO_PI = 2.0 * math.pi

_HAU_GAS = {
    "gas.isotope": "Na23",
    "gas.a_m": "2.8e-9",
    "gas.n0_m3": "8e19",
    "gas.Tc_K": "435e-9",
    "gas.eCB_rad_s": "2*pi*1.8e9",
}

PRESETS = {
    # slow-light experiment: gas of the rate figures, couplings of the theta figure
    "hau1999": {
        **_HAU_GAS,
        "coupling.omega_rad_s": "2*pi*5.61e6",
        "coupling.g_root_N0_rad_s": "2*pi*10e6",
        "coupling.gamma_A_per_s": "2*pi*10e6",
        "coupling.photon_number": "3e4",
    },
    # light-storage experiment: g sqrt(N0) ~ (2 pi) 15 MHz
    "hau2001": {
        **_HAU_GAS,
        "coupling.omega_rad_s": "2*pi*5.61e6",
        "coupling.g_root_N0_rad_s": "2*pi*15e6",
        "coupling.gamma_A_per_s": "2*pi*10e6",
        "coupling.photon_number": "3e4",
    },
}


def parse_number(text: str) -> float:
    """Parse ``1.5e3``, ``pi`` or a product such as ``2*pi*5.61e6``."""
    value = 1.0
    for factor in text.split("*"):
        factor = factor.strip()
        if factor == "pi":
            value *= math.pi
            continue
        try:
            value *= float(factor)
        except ValueError:
            raise ConfigError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"non-finite number: {text!r}")
    return value


def _convert(key: str, raw: str):
    kind = SCHEMA[key]
    raw = raw.strip()
    if kind == FLOAT:
        return parse_number(raw)
    if kind == INT:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: not an integer: {raw!r}") from None
    if kind == BOOL:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: not a boolean: {raw!r}")
    if kind == FLOATS:
        items = [s for s in raw.split(",") if s.strip()]
        if not items:
            raise ConfigError(f"{key}: empty list")
        values = [parse_number(s) for s in items]
        if values != sorted(values):
            raise ConfigError(f"{key}: list must be sorted ascending")
        return values
    if kind == FLOAT_OR_AUTO:
        return "auto" if raw.lower() == "auto" else parse_number(raw)
    return raw


def parse_lines(lines, source: str = "<config>") -> dict[str, str]:
    raw = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        raw[key] = value
    return raw


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        preset: str | None = None,
        config_path: str | Path | None = None,
        overrides: dict[str, str] | None = None,
    ) -> "RunConfig":
        """Merge preset < config file < command-line overrides."""
        raw: dict[str, str] = {}
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset {preset!r} (known: {', '.join(sorted(PRESETS))})")
            raw.update(PRESETS[preset])
        if config_path is not None:
            path = Path(config_path)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
            raw.update(parse_lines(text.splitlines(), str(path)))
        for key, value in (overrides or {}).items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}")
            raw[key] = value
        return cls({key: _convert(key, value) for key, value in raw.items()})

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def require(self, key: str):
        if key not in self.values:
            raise ConfigError(f"missing required key {key!r}")
        return self.values[key]

    def gas(self) -> CondensateParams:
        if "gas.mass_kg" in self.values:
            mass = self.values["gas.mass_kg"]
        elif "gas.isotope" in self.values:
            try:
                mass = isotope_mass(self.values["gas.isotope"])
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        else:
            raise ConfigError("gas block needs gas.isotope or gas.mass_kg")
        try:
            return CondensateParams(
                scattering_length_a=self.require("gas.a_m"),
                atom_mass_m=mass,
                density_n0=self.require("gas.n0_m3"),
                critical_temp_Tc=self.get("gas.Tc_K"),
                level_splitting_eCB=self.require("gas.eCB_rad_s"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def quadrature(self) -> QuadratureSettings:
        base = QuadratureSettings()
        try:
            return QuadratureSettings(
                relative_tolerance=self.get("quad.rtol", base.relative_tolerance),
                absolute_tolerance_scale=self.get("quad.atol_scale", base.absolute_tolerance_scale),
                landau_cutoff_multiplier=self.get("quad.landau_cutoff", base.landau_cutoff_multiplier),
                max_subdivisions=self.get("quad.max_subdivisions", base.max_subdivisions),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def y_grid(self) -> list[float]:
        if "scan.y_values" in self.values:
            values = self.values["scan.y_values"]
        else:
            lo = self.get("scan.y_min", 0.01)
            hi = self.get("scan.y_max", 10.0)
            count = self.get("scan.y_points", 200)
            if not (0 < lo < hi) or count < 2:
                raise ConfigError("need 0 < scan.y_min < scan.y_max and scan.y_points >= 2")
            values = [float(y) for y in np.geomspace(lo, hi, count)]
        if any(y <= 0 for y in values):
            raise ConfigError("scan.y_values must be positive")
        return values

    def temperatures(self, default: list[float]) -> list[float]:
        values = self.get("scan.T_over_Tc", default)
        if any(v < 0 for v in values):
            raise ConfigError("scan.T_over_Tc must be non-negative")
        return values

    def coupling(self, gamma_C: float) -> CouplingConfig:
        omega = self.require("coupling.omega_rad_s")
        kwargs = dict(
            gamma_A=self.get("coupling.gamma_A_per_s", 0.0),
            gamma_C=gamma_C,
            photon_number_n=self.get("coupling.photon_number", 1.0),
            gamma_A_on_excited_state=self.get("coupling.gamma_A_on_excited_state", True),
        )
        try:
            if "coupling.theta_rad" in self.values:
                if "coupling.g_root_N0_rad_s" in self.values:
                    raise ConfigError("give coupling.theta_rad or coupling.g_root_N0_rad_s, not both")
                return CouplingConfig.from_theta(self.values["coupling.theta_rad"], omega=omega, **kwargs)
            return CouplingConfig(omega=omega, g_root_N0=self.require("coupling.g_root_N0_rad_s"), **kwargs)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def ramp(self) -> Ramp:
        try:
            return Ramp(
                t_on=self.get("ramp.t_on_s", 10e-6),
                t_hold=self.get("ramp.t_hold_s", 1e-3),
                t_off=self.get("ramp.t_off_s", 10e-6),
                shape=self.get("ramp.shape", "smooth"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
