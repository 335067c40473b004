import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

warnings.filterwarnings("ignore", module="numba")


@pytest.fixture
def fig1_scenario():
    from dyncp.scenario import Scenario, UnitSystem

    return Scenario(1.0, 1.0, 20.0, UnitSystem.NATURAL)


@pytest.fixture
def fig3_scenario():
    from dyncp.scenario import scenario_from_dict

    return scenario_from_dict(
        {
            "dipole_moment": 6.31e-30,
            "dipole_unit": "C·m",
            "wavelength": 1.215e-7,
            "distance": 7.03e-8,
            "distance_unit": "m",
            "unit_system": "SI",
        }
    )


def log_grid(lo, hi, n):
    return np.logspace(np.log10(lo), np.log10(hi), n)
