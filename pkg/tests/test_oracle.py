import math
import os

import numpy as np
import pytest

from dyncp import force, oracle
from dyncp.errors import ConvergenceError, DomainError, LightConeError, ValidityError
from dyncp.oracle import (
    EnergyMethod,
    ModeSumSettings,
    QuadratureSettings,
    energy_quadrature,
    energy_quadrature_operator_form,
    force_fd_reduced,
    mode_sum_energy,
    mode_sum_reduced,
)
from dyncp.scenario import Scenario, UnitSystem

# quadrature value at (x0, a) = (2, 0.5); agrees with the operator form to 1e-9
E_2_HALF = 0.05881571500814


# --- regularized quadrature ----------------------------------------------------------


def test_energy_vanishes_at_time_zero():
    result = energy_quadrature(3.0, 0.0)
    assert result.value == 0.0 and result.estimated_error == 0.0


def test_reference_energy():
    result = energy_quadrature(2.0, 0.5)
    assert result.method is EnergyMethod.REGULARIZED_QUADRATURE
    assert result.value == pytest.approx(E_2_HALF, rel=1e-9)
    assert 0.0 <= result.estimated_error < 1e-6
    assert len(result.ladder) == len(result.samples) == 6


def test_energy_shift_delegates_to_quadrature():
    assert force.energy_shift(2.0, 0.5).value == energy_quadrature(2.0, 0.5).value


def test_energy_reaches_stationary_value():
    late, later = energy_quadrature(2.0, 200.0).value, energy_quadrature(2.0, 400.0).value
    assert abs(late - later) < 1e-3 * abs(later)
    assert later == pytest.approx(oracle.static_energy_quadrature(2.0).value, rel=1e-3)


def test_abel_samples_approach_the_limit():
    result = energy_quadrature(1.0, 0.3)
    gaps = np.abs(np.array(result.samples) - result.value)
    assert np.all(np.diff(gaps) < 0)


def test_quadrature_refuses_light_cone_and_bad_input():
    with pytest.raises(LightConeError):
        energy_quadrature(2.0, 1.0)
    with pytest.raises(DomainError):
        energy_quadrature(-1.0, 0.5)
    with pytest.raises(DomainError):
        energy_quadrature(1.0, -0.5)


def test_short_coarse_ladder_reports_convergence_failure():
    coarse = QuadratureSettings(epsilon_ladder=(0.4, 0.2, 0.1), extrapolation_order=1)
    with pytest.raises(ConvergenceError) as info:
        energy_quadrature(2.0, 0.5, coarse)
    assert info.value.residual > 1e-6


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epsilon_ladder": ()},
        {"epsilon_ladder": (0.1, 0.2)},
        {"epsilon_ladder": (0.1, -0.05)},
        {"extrapolation_order": 6},
        {"extrapolation_order": 0},
    ],
)
def test_quadrature_settings_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureSettings(**kwargs)


def test_upper_limit_rule():
    assert QuadratureSettings().upper_limit(2.0, 0.1) == 400.0
    assert QuadratureSettings().upper_limit(20.0, 0.1) == 1000.0
    with pytest.raises(DomainError):
        QuadratureSettings(x_max=15.0).upper_limit(2.0, 0.1)


@pytest.mark.parametrize("x0", [1.0, 2.0, 5.0])
@pytest.mark.parametrize("a", [0.3, 0.7, 2.0])
def test_operator_form_matches_direct_quadrature(x0, a):
    direct = energy_quadrature(x0, a).value
    operator = energy_quadrature_operator_form(x0, a)
    assert operator.method is EnergyMethod.OPERATOR_FORM
    assert operator.value == pytest.approx(direct, rel=1e-5)


def test_operator_form_step_error_is_second_order():
    errors = [abs(energy_quadrature_operator_form(2.0, 0.5, m, richardson=False).value - E_2_HALF) for m in (0.02, 0.01)]
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)


def test_operator_form_rejects_bad_step():
    with pytest.raises(DomainError):
        energy_quadrature_operator_form(2.0, 0.5, m_step=0.5)


# --- finite-difference forces --------------------------------------------------------


@pytest.mark.parametrize("x0", [1.0, 2.0, 5.0])
def test_static_force_derivative_matches_closed_form(x0):
    assert oracle.static_force_fd(x0) == pytest.approx(force.static_force(x0), rel=1e-6)


def test_fd_force_at_reference_point():
    assert force_fd_reduced(2.0, 0.5) == pytest.approx(force.total_force(2.0, 0.5).phi_total, rel=1e-4)


def test_fd_force_vanishes_at_time_zero():
    assert abs(force_fd_reduced(3.0, 0.0)) < 1e-8


@pytest.mark.parametrize("h_rel", [1e-3, 3e-4, 1e-4, 3e-5])
def test_fd_force_is_stable_under_step_changes(h_rel):
    reference = force.total_force(2.0, 1.5).phi_total
    assert force_fd_reduced(2.0, 1.5, h_rel=h_rel) == pytest.approx(reference, rel=1e-5)


def test_fd_force_checks_its_inputs():
    with pytest.raises(DomainError):
        force_fd_reduced(2.0, 0.5, h_rel=0.1)
    with pytest.raises(LightConeError):
        force_fd_reduced(2.0, 1.0 + 1e-4, h_rel=1e-4)


def test_scenario_fd_force(fig1_scenario):
    from dyncp.scenario import reduce

    point = reduce(fig1_scenario, 13.0)
    assert oracle.force_finite_difference(fig1_scenario, 13.0) == force_fd_reduced(point.x0, point.a)


# --- mode sum ------------------------------------------------------------------------


def test_mode_sum_vanishes_at_time_zero():
    assert mode_sum_reduced(2.0, 0.0, 20.0).value == 0.0


def test_mode_sum_is_close_to_quadrature_in_a_small_box():
    result = mode_sum_reduced(2.0, 0.5, 20.0)
    assert result.converged
    assert result.estimated_error < 1e-6 * abs(result.value)
    assert result.value == pytest.approx(E_2_HALF, rel=1e-3)


def test_fft_and_direct_summation_agree():
    fft = mode_sum_reduced(2.0, 0.5, 12.0)
    direct = mode_sum_reduced(2.0, 0.5, 12.0, method="direct")
    assert fft.value == pytest.approx(direct.value, rel=1e-8)
    shifted = mode_sum_reduced(2.0, 0.5, 12.0, atom_xy=(1.3, -2.1))
    shifted_direct = mode_sum_reduced(2.0, 0.5, 12.0, atom_xy=(1.3, -2.1), method="direct")
    assert shifted.value == pytest.approx(shifted_direct.value, rel=1e-8)


def test_mode_sum_is_deterministic():
    first, second = mode_sum_reduced(1.0, 0.3, 12.0), mode_sum_reduced(1.0, 0.3, 12.0)
    assert first.value == second.value and first.raw == second.raw


def test_direct_sum_is_identical_across_thread_counts():
    import subprocess
    import sys

    code = (
        "from dyncp.oracle import mode_sum_reduced;"
        "print(repr(mode_sum_reduced(2.0, 0.5, 12.0, atom_xy=(0.7, 0.2), method='direct').raw))"
    )
    outputs = []
    for threads in ("1", "4"):
        env = {**os.environ, "NUMBA_NUM_THREADS": threads, "DYNCP_NUM_THREADS": threads}
        proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1]


def test_moving_atom_off_axis_barely_changes_energy():
    centred = mode_sum_reduced(2.0, 0.5, 20.0).value
    shifted = mode_sum_reduced(2.0, 0.5, 20.0, atom_xy=(1.3, -2.1)).value
    assert abs(shifted - centred) < 1e-3 * abs(centred)


def test_mode_sum_at_resonant_mode_is_finite():
    # k0 = 5 pi / L is exactly a cavity wavenumber
    result = mode_sum_reduced(2.0 * 5.0 * math.pi / 12.0, 0.4, 12.0)
    assert math.isfinite(result.value)


def test_mode_sum_validity_limits():
    with pytest.raises(ValidityError):
        mode_sum_reduced(2.0, 0.5, 2.0)
    with pytest.raises(ValidityError):
        mode_sum_reduced(2.0, 5.0, 10.0)
    with pytest.raises(LightConeError):
        mode_sum_reduced(2.0, 1.0005, 20.0)
    with pytest.raises(DomainError):
        mode_sum_reduced(2.0, 0.5, 20.0, method="spectral")


def test_truncated_mode_sum_warns():
    settings = ModeSumSettings(box_side=12.0, time=1.0, max_index=40)
    result = mode_sum_reduced(2.0, 0.5, 12.0, settings)
    assert not result.converged
    assert any("truncates" in w for w in result.warnings)


@pytest.mark.parametrize(
    "kwargs",
    [{"max_index": 0}, {"cutoff_ladder": (20.0,)}, {"cutoff_ladder": (25.0, 20.0)}, {"cutoff_span": 1.5}],
)
def test_mode_sum_settings_validation(kwargs):
    with pytest.raises(DomainError):
        ModeSumSettings(box_side=20.0, time=1.0, **kwargs)


def test_cutoffs_grow_near_light_cone():
    settings = ModeSumSettings(box_side=20.0, time=1.0)
    assert np.all(settings.cutoffs(2.0, 0.9) > settings.cutoffs(2.0, 0.5))


def test_mode_sum_energy_for_a_scenario():
    s = Scenario(1.0, 1.0, 1.0, UnitSystem.NATURAL)
    settings = ModeSumSettings(box_side=12.0, time=1.0)
    assert mode_sum_energy(s, settings).value == mode_sum_reduced(2.0, 0.5, 12.0).value
    scaled = Scenario(1.0, 0.5, 2.0, UnitSystem.NATURAL)
    result = mode_sum_energy(scaled, ModeSumSettings(box_side=24.0, time=2.0))
    assert result.value == pytest.approx(mode_sum_reduced(2.0, 0.5, 12.0).value, rel=1e-12)
