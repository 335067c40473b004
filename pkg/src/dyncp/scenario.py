"""Physical parameters, unit conventions and the reduction to (x0, a).

Everything downstream works on the dimensionless pair

    x0 = 2 k0 d        (distance in units of the reduced transition wavelength)
    a  = c t / (2 d)   (time in units of the round-trip time)

and multiplies by ``mu**2 / d**4`` (Gaussian) or ``mu**2 / (4 pi eps0 d**4)``
(SI) only at the boundary.  ``UnitSystem.NATURAL`` covers the arbitrary-unit
scenarios with c = 1 used for the time-evolution plots.
"""
import enum
import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from scipy import constants

from .errors import DomainError

DEFAULT_LIGHT_CONE_WINDOW = 1e-6
# unreliable interval around the round-trip time (dipole approximation, gold plasma frequency)
PHYSICAL_EXCLUSION_SECONDS = 7e-17
# order of magnitude of the excited-state lifetime; perturbation theory only holds below it
VALIDITY_CEILING_SECONDS = 1e-8

SI_TO_GAUSSIAN_DIPOLE = 10.0 * constants.c * 100.0  # C m -> statC cm
SI_TO_GAUSSIAN_LENGTH = 100.0  # m -> cm
COULOMB_CONSTANT = 1.0 / (4.0 * math.pi * constants.epsilon_0)


class UnitSystem(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    SI = "SI"
    NATURAL = "natural"

    @property
    def speed_of_light(self):
        return {
            UnitSystem.GAUSSIAN: constants.c * 100.0,
            UnitSystem.SI: constants.c,
            UnitSystem.NATURAL: 1.0,
        }[self]


class Regime(str, enum.Enum):
    BEFORE_ROUND_TRIP = "BeforeRoundTrip"
    AFTER_ROUND_TRIP = "AfterRoundTrip"
    LIGHT_CONE = "LightCone"


@dataclass(frozen=True)
class Scenario:
    """One atom-wall configuration.

    Values are stored in the units of ``unit_system``: statC cm / cm^-1 / cm
    for Gaussian, C m / m^-1 / m for SI, arbitrary units (c = 1) for natural.
    The dipole magnitude is the full |mu|; isotropy (mu_i**2 = mu**2/3) is
    already folded into the force formulas.
    """

    dipole_moment: float
    transition_wavenumber: float
    distance: float
    unit_system: UnitSystem = UnitSystem.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "unit_system", UnitSystem(self.unit_system))
        for name in ("dipole_moment", "transition_wavenumber", "distance"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and positive, got {value!r}")

    @property
    def speed_of_light(self):
        return self.unit_system.speed_of_light

    @property
    def transition_frequency(self):
        return self.speed_of_light * self.transition_wavenumber

    @property
    def wavelength(self):
        return 2.0 * math.pi / self.transition_wavenumber

    def with_distance(self, distance):
        return replace(self, distance=distance)

    def with_wavenumber(self, transition_wavenumber):
        return replace(self, transition_wavenumber=transition_wavenumber)

    def to_gaussian(self):
        if self.unit_system is UnitSystem.GAUSSIAN:
            return self
        if self.unit_system is UnitSystem.NATURAL:
            raise DomainError("natural-unit scenarios have no physical unit conversion")
        return Scenario(
            dipole_moment=self.dipole_moment * SI_TO_GAUSSIAN_DIPOLE,
            transition_wavenumber=self.transition_wavenumber / SI_TO_GAUSSIAN_LENGTH,
            distance=self.distance * SI_TO_GAUSSIAN_LENGTH,
            unit_system=UnitSystem.GAUSSIAN,
        )

    def to_si(self):
        if self.unit_system is UnitSystem.SI:
            return self
        if self.unit_system is UnitSystem.NATURAL:
            raise DomainError("natural-unit scenarios have no physical unit conversion")
        return Scenario(
            dipole_moment=self.dipole_moment / SI_TO_GAUSSIAN_DIPOLE,
            transition_wavenumber=self.transition_wavenumber * SI_TO_GAUSSIAN_LENGTH,
            distance=self.distance / SI_TO_GAUSSIAN_LENGTH,
            unit_system=UnitSystem.SI,
        )

    def to_units(self, unit_system):
        unit_system = UnitSystem(unit_system)
        if unit_system is self.unit_system:
            return self
        return self.to_si() if unit_system is UnitSystem.SI else self.to_gaussian()


@dataclass(frozen=True)
class ReducedPoint:
    x0: float
    a: float
    regime: Regime


@dataclass(frozen=True)
class ForceScale:
    """Multiplier turning the dimensionless force into physical units."""

    gaussian_scale: float
    si_scale: float | None = None
    unit_system: UnitSystem = UnitSystem.GAUSSIAN

    @property
    def value(self):
        return self.si_scale if self.unit_system is UnitSystem.SI else self.gaussian_scale


def classify(a, window=DEFAULT_LIGHT_CONE_WINDOW):
    if abs(a - 1.0) < window:
        return Regime.LIGHT_CONE
    return Regime.BEFORE_ROUND_TRIP if a < 1.0 else Regime.AFTER_ROUND_TRIP


def reduce(s, t, window=DEFAULT_LIGHT_CONE_WINDOW):
    """Map a scenario and a time to (x0, a) and tag the temporal regime."""
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"time must be finite and non-negative, got {t!r}")
    x0 = 2.0 * s.transition_wavenumber * s.distance
    a = s.speed_of_light * t / (2.0 * s.distance)
    return ReducedPoint(x0=x0, a=a, regime=classify(a, window))


def roundtrip_time(s):
    return 2.0 * s.distance / s.speed_of_light


def force_scale(s):
    if s.unit_system is UnitSystem.SI:
        gaussian = s.to_gaussian()
        return ForceScale(
            gaussian_scale=gaussian.dipole_moment**2 / gaussian.distance**4,
            si_scale=COULOMB_CONSTANT * s.dipole_moment**2 / s.distance**4,
            unit_system=UnitSystem.SI,
        )
    return ForceScale(gaussian_scale=s.dipole_moment**2 / s.distance**4, unit_system=s.unit_system)


def light_cone_window(s, window=DEFAULT_LIGHT_CONE_WINDOW, seconds=None):
    """Dimensionless half-width around a = 1 to exclude.

    Scenarios with time in seconds (SI and Gaussian) additionally honour a
    physical interval (default 7e-17 s) around the round-trip time; the wider
    of the two wins.
    """
    if seconds is None and s.unit_system is not UnitSystem.NATURAL:
        seconds = PHYSICAL_EXCLUSION_SECONDS
    if seconds is None:
        return window
    return max(window, seconds / roundtrip_time(s))


# --- JSON boundary -------------------------------------------------------------

_DIPOLE_UNITS = {
    "C·m": UnitSystem.SI,
    "C*m": UnitSystem.SI,
    "C m": UnitSystem.SI,
    "statC·cm": UnitSystem.GAUSSIAN,
    "statC*cm": UnitSystem.GAUSSIAN,
    "statC cm": UnitSystem.GAUSSIAN,
    "arb": UnitSystem.NATURAL,
}
_LENGTH_TO_METRE = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}


def _length_factor(unit, target):
    """Multiplier converting a length in ``unit`` to the native length of ``target``."""
    if target is UnitSystem.NATURAL:
        if unit not in (None, "arb"):
            raise DomainError(f"natural-unit scenarios take distance_unit 'arb', got {unit!r}")
        return 1.0
    if unit not in _LENGTH_TO_METRE:
        raise DomainError(f"unknown distance_unit {unit!r}; expected one of {sorted(_LENGTH_TO_METRE)}")
    metres = _LENGTH_TO_METRE[unit]
    return metres if target is UnitSystem.SI else metres * SI_TO_GAUSSIAN_LENGTH


def scenario_from_dict(doc):
    """Build a Scenario from a JSON-style document.

    Keys: dipole_moment, dipole_unit, wavelength | wavenumber (exactly one, in
    distance_unit or its inverse), distance, distance_unit, unit_system.
    """
    doc = dict(doc)
    has_wl, has_wn = "wavelength" in doc, "wavenumber" in doc
    if has_wl == has_wn:
        raise DomainError("scenario must specify exactly one of 'wavelength' or 'wavenumber'")
    try:
        unit_system = UnitSystem(doc.get("unit_system", "Gaussian"))
    except ValueError:
        raise DomainError(f"unknown unit_system {doc.get('unit_system')!r}") from None
    dipole_unit = doc.get("dipole_unit", "arb" if unit_system is UnitSystem.NATURAL else None)
    if dipole_unit not in _DIPOLE_UNITS:
        raise DomainError(f"unknown dipole_unit {dipole_unit!r}; expected one of {sorted(_DIPOLE_UNITS)}")
    dipole_system = _DIPOLE_UNITS[dipole_unit]
    if (dipole_system is UnitSystem.NATURAL) != (unit_system is UnitSystem.NATURAL):
        raise DomainError("arbitrary units must be used for both the dipole and the unit system")

    mu = float(doc["dipole_moment"])
    if dipole_system is UnitSystem.SI and unit_system is UnitSystem.GAUSSIAN:
        mu *= SI_TO_GAUSSIAN_DIPOLE
    elif dipole_system is UnitSystem.GAUSSIAN and unit_system is UnitSystem.SI:
        mu /= SI_TO_GAUSSIAN_DIPOLE

    factor = _length_factor(doc.get("distance_unit"), unit_system)
    distance = float(doc["distance"]) * factor
    if has_wl:
        k0 = 2.0 * math.pi / (float(doc["wavelength"]) * factor)
    else:
        k0 = float(doc["wavenumber"]) / factor
    return Scenario(mu, k0, distance, unit_system)


def scenario_to_dict(s):
    units = {
        UnitSystem.SI: ("C·m", "m"),
        UnitSystem.GAUSSIAN: ("statC·cm", "cm"),
        UnitSystem.NATURAL: ("arb", "arb"),
    }[s.unit_system]
    doc = asdict(s)
    return {
        "dipole_moment": doc["dipole_moment"],
        "dipole_unit": units[0],
        "wavenumber": doc["transition_wavenumber"],
        "distance": doc["distance"],
        "distance_unit": units[1],
        "unit_system": s.unit_system.value,
    }


def load_scenario(path):
    return scenario_from_dict(json.loads(Path(path).read_text()))
