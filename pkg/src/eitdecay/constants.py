"""Physical constants (CODATA 2018) and the isotope mass table.

Every module reads hbar and k_B from here so that SI <-> reduced
conversions round-trip exactly.
"""

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K
ATOMIC_MASS_UNIT = 1.660539067e-27  # kg

ISOTOPE_MASS_U = {
    "Na23": 22.98976928,
    "Rb87": 86.909180527,
    "Li7": 7.016003437,
}


def isotope_mass(name: str) -> float:
    """Mass in kg of a named isotope, e.g. ``"Na23"``."""
    try:
        return ISOTOPE_MASS_U[name] * ATOMIC_MASS_UNIT
    except KeyError:
        known = ", ".join(sorted(ISOTOPE_MASS_U))
        raise ValueError(f"unknown isotope {name!r} (known: {known})") from None
