import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau_phase._util import circular_distance, wrap_phase
from landau_phase.dynamics import (
    center_trajectory,
    closed_form_center,
    dynamic_phase_quadrature,
    enclosed_flux,
    evolve,
    fit_circle,
    fit_circle_points,
    phase_report,
    shape_preservation_check,
)
from landau_phase.errors import ConfigError, NormalizationError
from landau_phase.fock import FockTruncation, PhysicalParams, TwoModeState
from landau_phase.states import StateSpec, displacement_matrix, make_state

P = PhysicalParams()
HALF = StateSpec.superposition([(0, 0, 1), (1, 0, 1)])


def test_wrap_phase_interval():
    assert wrap_phase(-math.pi) == math.pi
    assert wrap_phase(math.pi) == math.pi
    assert wrap_phase(3 * math.pi) == math.pi
    assert wrap_phase(2 * math.pi) == 0.0
    assert circular_distance(math.pi, -math.pi) == 0.0


class TestEvolve:
    def test_zero_time(self):
        psi = make_state(StateSpec.random(0), P, FockTruncation(6, 2))
        assert np.array_equal(evolve(psi, 0.0, P).amps, psi.amps)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0.2, 5.0))
    def test_full_period_is_minus_one(self, seed, omega):
        p = PhysicalParams(omega_B=omega)
        psi = make_state(StateSpec.random(seed), p, FockTruncation(8, 3))
        assert np.allclose(evolve(psi, p.period, p).amps, -psi.amps, atol=1e-12)

    def test_displaced_number_stays_displaced(self):
        t = FockTruncation(60, 0)
        n, alpha, time = 2, 1.0 + 0.5j, 0.83
        psi_t = evolve(make_state(StateSpec.displaced_number(n, alpha), P, t), time, P)
        alpha_t = alpha * np.exp(-1j * time)
        ref = displacement_matrix(alpha_t, t).entries[:, n] * np.exp(-1j * time * (n + 0.5))
        assert np.abs(psi_t.amps[:, 0] - ref).max() <= 1e-10


class TestPhaseReport:
    def test_hand_superposition(self):
        r = phase_report(make_state(HALF, P, FockTruncation(4, 0)), P)
        assert r.mean_N == pytest.approx(0.5, abs=1e-15)
        assert r.dynamic_phase == pytest.approx(-2 * math.pi, abs=1e-12)
        assert circular_distance(r.geometric_phase, math.pi) <= 1e-10
        assert r.reduced_flux == pytest.approx(-math.pi / 2, abs=1e-10)
        assert r.delta_a_sq == pytest.approx(0.25, abs=1e-10)
        assert abs(r.decomposition_residual) <= 1e-10

    @pytest.mark.parametrize("n", [0, 1, 5])
    def test_number_state(self, n):
        r = phase_report(make_state(StateSpec.number(n, 2), P, FockTruncation(6, 3)), P)
        assert circular_distance(r.total_phase, math.pi) <= 1e-12
        assert circular_distance(r.geometric_phase, 0.0) <= 1e-12
        assert r.reduced_flux == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31), st.sampled_from([1, -1]), st.floats(0.3, 4.0))
    def test_identities_for_random_states(self, seed, eps, omega):
        p = PhysicalParams(epsilon=eps, omega_B=omega)
        r = phase_report(make_state(StateSpec.random(seed), p, FockTruncation(12, 4)), p)
        assert abs(r.cycle_fidelity - 1) <= 1e-12
        assert circular_distance(r.total_phase, math.pi) <= 1e-12
        assert circular_distance(r.geometric_phase, 2 * math.pi * r.mean_N) <= 1e-9
        assert abs(r.decomposition_residual) <= 1e-9

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1 + 1j])
    def test_displaced_family(self, alpha):
        r = phase_report(make_state(StateSpec.displaced_number(2, alpha), P, FockTruncation(64, 0)), P)
        assert circular_distance(r.geometric_phase, 2 * math.pi * abs(alpha) ** 2) <= 1e-8
        assert r.reduced_flux == pytest.approx(-2 * math.pi * abs(alpha) ** 2, abs=1e-8)

    def test_requires_normalized(self):
        t = FockTruncation(2, 0)
        with pytest.raises(NormalizationError):
            phase_report(TwoModeState(np.array([[1.0], [1.0], [0]]), t), P)

    def test_quadrature_matches(self):
        psi = make_state(StateSpec.random(4), P, FockTruncation(10, 2))
        r = phase_report(psi, P)
        assert dynamic_phase_quadrature(psi, P) == pytest.approx(r.dynamic_phase, abs=1e-10)

    def test_report_dict_units(self):
        p = PhysicalParams(epsilon=-1, flux_unit=3.0)
        r = phase_report(make_state(StateSpec.coherent(1.0), p, FockTruncation(32, 0)), p)
        natural = r.to_dict(p, "natural")
        physical = r.to_dict(p, "physical")
        assert natural["flux"] == pytest.approx(2 * math.pi)
        assert physical["flux"] == pytest.approx(6 * math.pi)
        assert natural["mean_a"] == pytest.approx([1.0, 0.0])


class TestFlux:
    def test_number_state_no_flux(self):
        f = enclosed_flux(make_state(StateSpec.number(3), P, FockTruncation(5, 0)), P)
        assert f["flux"] == 0

    def test_coherent_flux(self):
        f = enclosed_flux(make_state(StateSpec.coherent(0.6j), P, FockTruncation(30, 0)), P)
        assert f["reduced_flux"] == pytest.approx(-2 * math.pi * 0.36, abs=1e-12)

    def test_flux_sign_follows_charge(self):
        psi = make_state(StateSpec.coherent(1.0), P, FockTruncation(30, 0))
        neg = PhysicalParams(epsilon=-1)
        assert enclosed_flux(psi, P)["flux"] == -enclosed_flux(psi, neg)["flux"]


class TestTrajectory:
    def test_number_state_fixed_point(self):
        psi = make_state(StateSpec.number(2, 1), P, FockTruncation(6, 4))
        traj = center_trajectory(psi, P)
        assert np.abs(traj.x).max() <= 1e-14 and np.abs(traj.y).max() <= 1e-14
        fit = fit_circle(traj)
        assert fit.degenerate and fit.radius == 0 and fit.handedness == "undefined"

    def test_number_state_with_guiding_center(self):
        beta_b = 0.4 - 0.3j
        psi = make_state(StateSpec.displaced_number(1, 0, b_shift=beta_b), P, FockTruncation(12, 24))
        traj = center_trajectory(psi, P)
        s = math.sqrt(2)
        assert np.allclose(traj.x, s * beta_b.real, atol=1e-10)
        assert np.allclose(traj.y, -s * beta_b.imag, atol=1e-10)

    def test_coherent_radius(self):
        psi = make_state(StateSpec.coherent(2.0), P, FockTruncation(40, 0))
        fit = fit_circle(center_trajectory(psi, P))
        assert fit.radius == pytest.approx(2 * math.sqrt(2), abs=1e-8)
        assert np.allclose(fit.center, (0, 0), atol=1e-8)
        assert fit.radius == pytest.approx(2.8284, abs=1e-4)

    def test_coherent_one_plus_i(self):
        psi = make_state(StateSpec.coherent(1 + 1j), P, FockTruncation(40, 0))
        assert fit_circle(center_trajectory(psi, P)).radius == pytest.approx(2.0, abs=1e-8)

    @pytest.mark.parametrize("eps,hand", [(1, "clockwise"), (-1, "anticlockwise")])
    def test_handedness(self, eps, hand):
        p = PhysicalParams(epsilon=eps)
        psi = make_state(StateSpec.coherent(1.0, b_shift=0.5), p, FockTruncation(32, 20))
        fit = fit_circle(center_trajectory(psi, p))
        assert fit.handedness == hand
        assert fit.angular_frequency == pytest.approx(1.0, abs=1e-8)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**31), st.sampled_from([1, -1]))
    def test_matrix_and_closed_paths_agree(self, seed, eps):
        # position is linear in the ladder operators, so even amplitude on the
        # top level gives the same center both ways
        p = PhysicalParams(epsilon=eps)
        psi = make_state(StateSpec.random(seed), p, FockTruncation(6, 3))
        traj = center_trajectory(psi, p)
        assert traj.max_discrepancy <= 1e-12

    def test_csv_layout(self):
        psi = make_state(StateSpec.coherent(1.0), P, FockTruncation(30, 0))
        rows = list(csv.reader(io.StringIO(center_trajectory(psi, P, n_samples=9).to_csv())))
        assert rows[0] == ["t", "x", "y", "x_closed", "y_closed"]
        assert len(rows) == 10
        assert float(rows[1][1]) == pytest.approx(math.sqrt(2))

    def test_too_few_samples(self):
        psi = make_state(StateSpec.coherent(1.0), P, FockTruncation(30, 0))
        with pytest.raises(ConfigError):
            center_trajectory(psi, P, n_samples=4)


class TestCircleFit:
    @settings(max_examples=30, deadline=None)
    @given(
        st.floats(0.05, 5.0),
        st.floats(-3, 3),
        st.floats(-3, 3),
        st.floats(0.3, 3.0),
        st.sampled_from([1, -1]),
        st.floats(0, 2 * math.pi),
    )
    def test_exact_circle(self, r, cx, cy, w, sense, phi):
        t = np.linspace(0, 2 * math.pi / w, 64)
        x = cx + r * np.cos(w * t + phi)
        y = cy + sense * r * np.sin(w * t + phi)
        fit = fit_circle_points(t, x, y)
        assert fit.rms_residual <= 1e-10
        assert fit.radius == pytest.approx(r, abs=1e-9)
        assert fit.angular_frequency == pytest.approx(w, abs=1e-9)
        assert fit.handedness == ("anticlockwise" if sense > 0 else "clockwise")

    def test_closed_form_matches_samples(self):
        t = np.linspace(0, 2 * math.pi, 33)
        x, y = closed_form_center(1 + 1j, 0.5, t, P)
        fit = fit_circle_points(t, x, y)
        assert fit.center[0] == pytest.approx(0.5 * math.sqrt(2), abs=1e-12)
        assert fit.handedness == "clockwise"


class TestShapePreservation:
    def test_pure_number_state(self):
        assert shape_preservation_check(3, 0, P, FockTruncation(20, 0), np.linspace(0, 6, 5)) <= 1e-14

    def test_coherent(self):
        times = np.linspace(0, P.period, 16)
        assert shape_preservation_check(0, 1.0, P, FockTruncation(96, 0), times) <= 1e-8

    def test_converged_between_truncations(self):
        times = np.linspace(0, P.period, 16)
        a = shape_preservation_check(2, 1.5, P, FockTruncation(64, 0), times)
        b = shape_preservation_check(2, 1.5, P, FockTruncation(96, 0), times)
        assert a <= 1e-8 and b <= 1e-8
