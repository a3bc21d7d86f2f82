"""Collisional decay of momentum-tagged condensate excitations and EIT dark-state dynamics."""

from eitdecay.gas import (
    CondensateParams,
    ReducedPoint,
    bogoliubov_energy,
    bose_population,
    healing_wavenumber,
    reduce,
    unreduce,
)
from eitdecay.rates import (
    MinimizationResult,
    QuadratureError,
    QuadratureSettings,
    RateBreakdown,
    beliaev_rate,
    kinetic_theory_rate,
    landau_rate,
    low_k_asymptote,
    minimize_rate_over_k,
    rate_t0_closed_form,
    total_rate,
)
from eitdecay.dynamics import (
    CouplingConfig,
    EvolutionResult,
    MomentMatrix,
    Ramp,
    dark_state_moments,
    delay_time_tau_d,
    drift_matrix,
    evolve_moments,
    storage_protocol,
    storage_time_tau_s,
    theta_sweep,
)
from eitdecay.oracle import lindblad_oracle

__version__ = "0.1.0"

__all__ = [
    "CondensateParams",
    "CouplingConfig",
    "EvolutionResult",
    "MinimizationResult",
    "MomentMatrix",
    "QuadratureError",
    "QuadratureSettings",
    "Ramp",
    "RateBreakdown",
    "ReducedPoint",
    "beliaev_rate",
    "bogoliubov_energy",
    "bose_population",
    "dark_state_moments",
    "delay_time_tau_d",
    "drift_matrix",
    "evolve_moments",
    "healing_wavenumber",
    "kinetic_theory_rate",
    "landau_rate",
    "lindblad_oracle",
    "low_k_asymptote",
    "minimize_rate_over_k",
    "rate_t0_closed_form",
    "reduce",
    "storage_protocol",
    "storage_time_tau_s",
    "theta_sweep",
    "total_rate",
    "unreduce",
]
