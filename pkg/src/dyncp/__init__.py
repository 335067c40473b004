"""Time-dependent Casimir-Polder force on an initially bare atom near a mirror."""
from .errors import ConvergenceError, DomainError, LightConeError, ValidityError
from .force import (
    ForceResult,
    dynamical_force,
    energy_shift,
    force_at,
    force_table,
    static_force,
    static_force_first_maximum,
    static_force_zeros,
    total_force,
)
from .scenario import (
    Regime,
    Scenario,
    UnitSystem,
    classify,
    load_scenario,
    reduce,
    scenario_from_dict,
    scenario_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "ForceResult",
    "LightConeError",
    "Regime",
    "Scenario",
    "UnitSystem",
    "ValidityError",
    "classify",
    "dynamical_force",
    "energy_shift",
    "force_at",
    "force_table",
    "load_scenario",
    "reduce",
    "scenario_from_dict",
    "scenario_to_dict",
    "static_force",
    "static_force_first_maximum",
    "static_force_zeros",
    "total_force",
]
