import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyncp import force, oracle
from dyncp.errors import DomainError, LightConeError
from dyncp.scenario import Regime, Scenario, UnitSystem, force_scale, roundtrip_time


def small_x0_static(z):
    # series of the closed static form about z = 0; logarithms first enter at z^5
    return -0.25 - z / (6 * math.pi) + z**3 / (36 * math.pi) + z**4 / 96


# --- static force --------------------------------------------------------------------


@pytest.mark.parametrize("z", [1e-4, 1e-3, 1e-2])
def test_static_force_matches_small_argument_series(z):
    assert force.static_force(z) == pytest.approx(small_x0_static(z), abs=1e-10)


def test_static_force_scales_as_inverse_fourth_power_at_short_distance():
    # at fixed mu and k0 the physical force is phi(x0) / d^4
    d = np.array([1e-4, 1e-3]) / 2
    magnitude = np.abs(force.static_force(2 * d)) / d**4
    slope = np.diff(np.log(magnitude)) / np.diff(np.log(d))
    assert slope[0] == pytest.approx(-4.0, rel=1e-2)


def test_static_force_is_repulsive_at_fig3_distance():
    assert force.static_force(4 * math.pi * 70.3 / 121.5) > 0


def test_no_static_zero_at_short_distance():
    assert force.static_force_zeros(0.01, 2.0) == []
    assert np.all(force.static_force(np.linspace(0.01, 2.0, 500)) < 0)


def test_static_zero_spacing_tends_to_pi():
    roots = force.static_force_zeros(0.01, 80.0)
    assert len(roots) > 10
    spacing = np.diff(roots)[4:]
    assert np.all(np.abs(spacing - math.pi) < 0.05 * math.pi)
    assert abs(spacing[-1] - math.pi) < abs(spacing[0] - math.pi)


def test_static_zeros_are_refined():
    for root in force.static_force_zeros(0.5, 30.0):
        assert force.static_force(root - 2e-10) * force.static_force(root + 2e-10) < 0


def test_doubling_k0_halves_zero_distances():
    for root in force.static_force_zeros(0.5, 40.0):
        d_k1 = root / 2.0
        one = Scenario(1.0, 1.0, d_k1, UnitSystem.NATURAL)
        two = Scenario(1.0, 2.0, d_k1 / 2, UnitSystem.NATURAL)
        assert force.force_at(one, 0.0).phi_static == force.force_at(two, 0.0).phi_static
        below, above = two.with_distance(d_k1 / 2 - 1e-9), two.with_distance(d_k1 / 2 + 1e-9)
        assert force.force_at(below, 0.0).phi_static * force.force_at(above, 0.0).phi_static < 0


def test_first_maximum_is_near_fig3_distance():
    peak = force.static_force_first_maximum()
    first, second = force.static_force_zeros(0.5, 20.0)[:2]
    assert first < peak < second
    assert abs(peak - 7.27) / peak < 0.02


def test_static_force_rejects_non_positive():
    for bad in (0.0, -1.0, math.nan):
        with pytest.raises(DomainError):
            force.static_force(bad)


# --- dynamical force -----------------------------------------------------------------


@pytest.mark.parametrize("x0", [1.0, 5.0, 40.0])
def test_dynamical_force_cancels_static_at_time_zero(x0):
    assert force.dynamical_force(x0, 0.0) == pytest.approx(-force.static_force(x0), abs=1e-12)


@settings(max_examples=20)
@given(st.floats(min_value=0.1, max_value=50.0))
def test_total_force_vanishes_at_time_zero(x0):
    assert abs(force.total_force(x0, 0.0).phi_total) < 1e-9


def test_fig1_force_vanishes_at_time_zero():
    assert abs(force.total_force(40.0, 0.0).phi_total) < 1e-9


@pytest.mark.parametrize("x0", [1.0, 5.0])
def test_dynamical_force_negligible_long_after_round_trip(x0):
    assert abs(force.dynamical_force(x0, 100.0)) < 0.01 * abs(force.static_force(x0))


@pytest.mark.parametrize("x0", [1.0, 2.0, 5.0])
def test_running_maximum_decays(x0):
    peaks = [np.max(np.abs(force.dynamical_force(x0, np.linspace(A, 2 * A, 2001)))) for A in (10, 50, 100)]
    assert peaks[0] > peaks[1] > peaks[2]


@pytest.mark.parametrize("side", [-1.0, 1.0])
def test_force_grows_towards_light_cone(side):
    values = [abs(force.dynamical_force(40.0, 1.0 + side * delta)) for delta in (1e-2, 1e-3, 1e-4)]
    assert values[0] < values[1] < values[2]


def test_light_cone_is_refused():
    with pytest.raises(LightConeError):
        force.dynamical_force(2.0, 1.0)
    with pytest.raises(LightConeError):
        force.total_force(2.0, np.array([0.5, 1.0 + 1e-7]))
    assert force.dynamical_force(2.0, 1.0 + 1e-3, window=1e-4) != 0


def test_domain_errors():
    with pytest.raises(DomainError):
        force.dynamical_force(0.0, 0.5)
    with pytest.raises(DomainError):
        force.dynamical_force(1.0, -0.1)
    with pytest.raises(DomainError):
        force.dynamical_force(1.0, math.inf)


def test_force_is_nonzero_before_round_trip():
    rng = np.random.default_rng(7)
    x0 = rng.uniform(0.5, 20.0, 10)
    a = rng.uniform(0.05, 0.95, 10)
    assert np.all(np.abs(force.dynamical_force(x0, a)) > 1e-12)


def test_total_force_changes_sign_before_round_trip_at_fig1_distance():
    _, _, total = force.force_table(40.0, np.linspace(1e-3, 0.999, 5000))
    assert np.count_nonzero(np.diff(np.sign(total))) >= 2


def test_fig1_traces_are_distinct_and_nonzero(fig1_scenario):
    other = Scenario(1.0, 2.0, 20.0, UnitSystem.NATURAL)
    t = np.linspace(0.5, 39.5, 400)
    one = np.array([force.force_at(fig1_scenario, x).phi_total for x in t])
    two = np.array([force.force_at(other, x).phi_total for x in t])
    assert np.all(one != 0) and np.all(two != 0)
    assert np.max(np.abs(one - two)) > 0.1 * np.max(np.abs(one))


def test_force_oscillates_around_static_value_after_round_trip():
    static, _, total = force.force_table(40.0, np.linspace(2.0, 6.0, 4001))
    above = np.count_nonzero(total > static)
    assert 0.3 < above / total.size < 0.7
    assert np.count_nonzero(np.diff(np.sign(total - static))) > 10


# --- result type and vectorization ---------------------------------------------------


@given(st.floats(min_value=0.1, max_value=50.0), st.floats(min_value=0.0, max_value=20.0))
def test_force_result_invariants(x0, a):
    if abs(a - 1.0) < 1e-6:
        return
    result = force.total_force(x0, a)
    assert result.phi_total == result.phi_static + result.phi_dyn
    assert result.available
    assert result.regime is (Regime.BEFORE_ROUND_TRIP if a < 1 else Regime.AFTER_ROUND_TRIP)


def test_physical_value_uses_scenario_scale(fig3_scenario):
    result = force.total_force(7.27, 0.4, scenario=fig3_scenario)
    assert result.physical_value == result.phi_total * force_scale(fig3_scenario).value


def test_light_cone_point_is_flagged_unavailable(fig3_scenario):
    result = force.force_at(fig3_scenario, roundtrip_time(fig3_scenario))
    assert result.regime is Regime.LIGHT_CONE
    assert not result.available and result.phi_total is None
    assert result.phi_static > 0


def test_force_table_marks_light_cone_with_nan():
    static, dyn, total = force.force_table(3.0, np.array([0.5, 1.0, 2.0]))
    assert np.isnan(dyn[1]) and np.isnan(total[1])
    assert np.all(np.isfinite(static))
    assert dyn[0] == force.dynamical_force(3.0, 0.5)


def test_vectorized_matches_scalar():
    x0 = np.array([0.7, 3.0, 12.0, 40.0])
    a = np.array([0.2, 0.9, 1.4, 7.0])
    vec = force.dynamical_force(x0, a)
    assert np.array_equal(vec, [force.dynamical_force(x, y) for x, y in zip(x0, a)])


def test_term_decomposition_sums_to_dynamical_force():
    for a in (0.4, 2.5):
        terms = force.dynamical_terms(3.0, a)
        assert sum(terms.values()) == pytest.approx(force.dynamical_force(3.0, a), rel=1e-14)


def test_every_ambiguous_term_has_an_adopted_description():
    adopted = set(force.TERMS[Regime.BEFORE_ROUND_TRIP]) | set(force.TERMS[Regime.AFTER_ROUND_TRIP])
    assert set(force.VARIANTS) <= adopted
    assert set(force.ADOPTED) == set(force.VARIANTS)


# --- agreement with the quadrature oracle --------------------------------------------


@settings(max_examples=8)
@given(
    st.sampled_from([1.0, 2.0, 5.0]),
    st.one_of(st.floats(min_value=0.2, max_value=0.9), st.floats(min_value=1.1, max_value=3.0)),
)
def test_closed_form_matches_energy_derivative(x0, a):
    closed = force.total_force(x0, a).phi_total
    assert closed == pytest.approx(oracle.force_fd_reduced(x0, a), rel=1e-4)


@pytest.mark.parametrize("term, label", [(t, label) for t, v in force.VARIANTS.items() for label in v])
def test_variant_readings_disagree_with_oracle(term, label):
    regime = Regime.BEFORE_ROUND_TRIP if term.startswith("before.") else Regime.AFTER_ROUND_TRIP
    x0, a = (2.0, 0.7) if regime is Regime.BEFORE_ROUND_TRIP else (2.0, 1.5)
    reference = oracle.force_fd_reduced(x0, a)
    variant = force.VARIANTS[term][label][0]
    closed = force.total_force(x0, a).phi_total
    swapped = closed + variant(x0, a) - force.TERMS[regime][term](x0, a)
    assert abs(closed - reference) < 1e-4 * abs(reference)
    assert abs(swapped - reference) > 1e-2 * abs(reference)
