import math

import pytest

from eitdecay.constants import isotope_mass
from eitdecay.gas import CondensateParams, reduced_temperature

TWO_PI = 2.0 * math.pi


def hau_params() -> CondensateParams:
    """23Na gas of the slow-light experiment."""
    return CondensateParams(
        scattering_length_a=2.8e-9,
        atom_mass_m=isotope_mass("Na23"),
        density_n0=8e19,
        critical_temp_Tc=435e-9,
        level_splitting_eCB=TWO_PI * 1.8e9,
    )


@pytest.fixture(scope="session")
def gas():
    return hau_params()


@pytest.fixture(scope="session")
def t_half(gas):
    return reduced_temperature(gas, 0.5)


@pytest.fixture(scope="session")
def t_tenth(gas):
    return reduced_temperature(gas, 0.1)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
