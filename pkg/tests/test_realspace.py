import math

import numpy as np
import pytest

from landau_phase.errors import BoundaryError, ConfigError, DimensionError
from landau_phase.fock import FockTruncation, PhysicalParams
from landau_phase.realspace import (
    Grid,
    GridField,
    HolomorphicPoly,
    apply_ladder_grid,
    displace_wavefunction,
    fock_basis_on_grid,
    ground_state,
    ladder_mean,
    number_wavefunction,
    project_to_fock,
    synthesize_state,
)
from landau_phase.states import StateSpec, make_state

P = PhysicalParams()
ONE = HolomorphicPoly()


@pytest.fixture(scope="module")
def grid10():
    return Grid(256, 256, 10.0, 10.0)


@pytest.fixture(scope="module")
def grid12():
    return Grid(256, 256, 12.0, 12.0)


def align(field, ref):
    """Remove the global phase of ``field`` relative to ``ref``."""
    ov = ref.inner(field)
    return field.values * (np.conj(ov) / abs(ov))


class TestGrid:
    def test_power_of_two(self):
        with pytest.raises(ConfigError):
            Grid(100, 128)

    def test_spacing_and_wavenumbers(self):
        g = Grid(64, 32, 4.0, 2.0)
        assert g.dx == pytest.approx(8.0 / 64)
        assert g.x[0] == -4.0 and g.x[-1] == pytest.approx(4.0 - g.dx)
        assert g.kx[1] == pytest.approx(2 * math.pi / 8.0)

    def test_field_shape_checked(self):
        with pytest.raises(DimensionError):
            GridField(np.zeros((4, 4)), Grid(8, 8))


class TestNumberWavefunction:
    def test_ground_state_closed_form(self):
        g = Grid(128, 128, 8.0, 8.0)
        X, Y = g.mesh
        raw = math.sqrt(1 / (2 * math.pi)) * np.exp(-(X**2 + Y**2) / 4)
        assert GridField(raw, g).norm_sq() == pytest.approx(1.0, abs=1e-10)
        psi0 = ground_state(g, P)
        assert np.abs(align(psi0, GridField(raw, g)) - raw).max() <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 4])
    @pytest.mark.parametrize("eps", [1, -1])
    def test_constant_f_gives_zbar_power(self, n, eps, grid10):
        p = PhysicalParams(epsilon=eps)
        z = grid10.z(p)
        ref = GridField(np.conj(z) ** n * np.exp(-np.abs(z) ** 2), grid10).normalized()
        psi = number_wavefunction(n, ONE, grid10, p)
        assert np.abs(align(psi, ref) - ref.values).max() <= 1e-10

    def test_holomorphic_factor_orthogonal(self, grid10):
        a = number_wavefunction(0, ONE, grid10, P)
        b = number_wavefunction(0, HolomorphicPoly((0, 1)), grid10, P)
        assert abs(a.inner(b)) <= 1e-8

    def test_gram_matrix(self, grid10):
        fields = [number_wavefunction(n, ONE, grid10, P) for n in range(7)]
        gram = np.array([[f.inner(g) for g in fields] for f in fields])
        assert np.abs(gram - np.eye(7)).max() <= 1e-6

    def test_boundary_violation(self):
        with pytest.raises(BoundaryError):
            number_wavefunction(0, ONE, Grid(64, 64, 3.0, 3.0), P)

    def test_negative_level(self, grid10):
        with pytest.raises(ConfigError):
            number_wavefunction(-1, ONE, grid10, P)

    def test_zero_polynomial(self):
        with pytest.raises(ConfigError):
            HolomorphicPoly((0, 0))


class TestLadderOnGrid:
    @pytest.mark.parametrize("eps", [1, -1])
    def test_annihilates_ground_state(self, eps, grid10):
        p = PhysicalParams(epsilon=eps)
        out = apply_ladder_grid("a", ground_state(grid10, p), p, check=False)
        assert np.abs(out.values).max() <= 1e-8

    def test_number_of_ground_state(self, grid10):
        lowered = apply_ladder_grid("a", ground_state(grid10, P), P, check=False)
        assert lowered.norm_sq() <= 1e-8

    def test_raising_reproduces_levels(self, grid12):
        psi = ground_state(grid12, P)
        for k in range(6):
            psi = GridField(apply_ladder_grid("a_dag", psi, P).values / math.sqrt(k + 1), grid12)
            ref = number_wavefunction(k + 1, ONE, grid12, P)
            assert np.abs(psi.values - ref.values).max() <= 1e-7

    @pytest.mark.parametrize("coeffs", [(1.0,), (0.0, 1.0), (1.0, 0.0, 1.0)])
    def test_lowering_counts_level_for_any_f(self, coeffs, grid12):
        f = HolomorphicPoly(coeffs)
        for n in range(4):
            psi = number_wavefunction(n, f, grid12, P)
            assert apply_ladder_grid("a", psi, P, check=False).norm_sq() == pytest.approx(n, abs=1e-6)

    def test_b_raises_guiding_level(self, grid12):
        psi = ground_state(grid12, P)
        raised = apply_ladder_grid("b_dag", psi, P)
        ref = number_wavefunction(0, HolomorphicPoly((0, 1)), grid12, P)
        assert abs(abs(ref.inner(raised)) - 1) <= 1e-8

    def test_unknown_operator(self, grid10):
        with pytest.raises(ConfigError):
            apply_ladder_grid("c", ground_state(grid10, P), P)


class TestDisplacement:
    def test_zero_is_identity(self, grid10):
        psi = ground_state(grid10, P)
        assert np.array_equal(displace_wavefunction(psi, 0, P).values, psi.values)

    @pytest.mark.parametrize("eps", [1, -1])
    def test_density_is_rigidly_shifted(self, eps, grid10):
        p = PhysicalParams(epsilon=eps)
        alpha = 0.9 + 0.7j
        moved = displace_wavefunction(ground_state(grid10, p), alpha, p)
        s = p.orbit_scale
        X, Y = grid10.mesh
        ref = np.exp(-((X - s * alpha.real) ** 2 + (Y - eps * s * alpha.imag) ** 2) / 2) / (2 * math.pi)
        assert np.abs(moved.density() - ref).max() <= 1e-7

    @pytest.mark.parametrize("alpha", [1.0, 0.5 - 1j])
    def test_mean_lowering_is_alpha(self, alpha, grid10):
        moved = displace_wavefunction(ground_state(grid10, P), alpha, P)
        assert abs(ladder_mean("a", moved, P) - alpha) <= 1e-6

    def test_pushed_off_grid(self):
        g = Grid(128, 128, 8.0, 8.0)
        with pytest.raises(BoundaryError):
            displace_wavefunction(ground_state(g, P), 4.0, P)


class TestProjection:
    def test_ground_state(self, grid10):
        proj = project_to_fock(ground_state(grid10, P), P, FockTruncation(10, 4))
        amps = np.abs(proj.state.amps)
        assert amps[0, 0] == pytest.approx(1, abs=1e-7)
        amps[0, 0] = 0
        assert amps.max() <= 1e-7

    def test_displaced_ground_state(self, grid10):
        trunc = FockTruncation(24, 0)
        moved = displace_wavefunction(ground_state(grid10, P), 1.0, P)
        proj = project_to_fock(moved, P, trunc)
        expected = make_state(StateSpec.coherent(1.0), P, trunc).amps
        ov = np.vdot(proj.state.amps.ravel(), expected.ravel())
        assert np.abs(proj.state.amps * ov / abs(ov) - expected).max() <= 1e-5

    @pytest.mark.parametrize("n", [0, 3, 6])
    def test_number_states(self, n, grid10):
        proj = project_to_fock(number_wavefunction(n, ONE, grid10, P), P, FockTruncation(8, 0))
        assert abs(proj.state.amps[n, 0]) == pytest.approx(1, abs=1e-6)

    def test_ladder_and_closed_bases_agree(self, grid10):
        trunc = FockTruncation(6, 3)
        a = fock_basis_on_grid(grid10, P, trunc, "ladder")
        b = fock_basis_on_grid(grid10, P, trunc, "closed")
        overlaps = np.einsum("ijxy,ijxy->ij", a.conj(), b) * grid10.cell_area
        assert np.abs(np.abs(overlaps) - 1).max() <= 1e-6

    def test_synthesis_round_trip(self, grid10):
        trunc = FockTruncation(12, 4)
        state = make_state(StateSpec.random(3, n_max=4), P, trunc)
        field = synthesize_state(state, grid10, P)
        back = project_to_fock(field, P, trunc, method="closed").state
        assert abs(abs(back.overlap(state)) - 1) <= 1e-8

    def test_low_capture_rejected(self, grid10):
        from landau_phase.errors import TruncationError

        with pytest.raises(TruncationError):
            project_to_fock(number_wavefunction(6, ONE, grid10, P), P, FockTruncation(3, 0))


class TestLPGF:
    def test_round_trip(self, tmp_path):
        g = Grid(16, 32, 2.0, 3.0)
        rng = np.random.default_rng(0)
        field = GridField(rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape), g)
        path = tmp_path / "f.lpgf"
        field.save(path)
        back = GridField.load(path)
        assert back.grid == g
        assert np.array_equal(back.values, field.values)
        data = path.read_bytes()
        assert data[:4] == b"LPGF" and len(data) == 32 + 16 * 16 * 32

    def test_layout_is_row_major_over_x(self):
        g = Grid(2, 4, 1.0, 1.0)
        values = np.arange(8).reshape(2, 4) * (1 + 1j)
        raw = GridField(values, g).to_bytes()[32:]
        assert np.frombuffer(raw, "<c16")[1] == 1 + 1j

    @pytest.mark.parametrize(
        "mutate", [lambda b: b"XXXX" + b[4:], lambda b: b[:-16], lambda b: b[:10]]
    )
    def test_corrupt(self, mutate):
        data = GridField(np.ones((4, 4)), Grid(4, 4)).to_bytes()
        with pytest.raises(ConfigError):
            GridField.from_bytes(mutate(data))

    def test_density_csv(self):
        g = Grid(4, 4, 1.0, 1.0)
        lines = GridField(np.full((4, 4), 2j), g).density_csv().splitlines()
        assert lines[0] == "x,y,density"
        assert len(lines) == 17
        assert lines[1] == "-1.0,-1.0,4.0"
