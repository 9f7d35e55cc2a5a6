"""Split-step grid propagator for the symmetric-gauge Hamiltonian.

This path never touches ladder operators.  The Hamiltonian is split as

    H = p^2/2M + M w^2 r^2/8 - (eps w/2) x p_y + (eps w/2) y p_x

and every piece is a pure phase in some representation: kinetic in
(k_x, k_y), harmonic in (x, y), x p_y in (x, k_y) and y p_x in (k_x, y).
One step is the symmetric sequence

    K/2  V/2  Xp/2  Yp  Xp/2  V/2  K/2

so the scheme is second order in dt and unitary up to FFT roundoff.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from . import _kernels
from ._util import circular_distance, max_workers, to_jsonable, wrap_phase
from .dynamics import Trajectory, closed_form_center, evolve, phase_report
from .errors import BoundaryError, ConfigError, NumericalError
from .realspace import BOUNDARY_DENSITY, Grid, GridField, synthesize_state
from .states import ladder_means, make_state

MIN_STEPS = 1024
TRAJECTORY_SAMPLES = 64
MIN_CYCLE_OVERLAP = 0.99


@dataclass(frozen=True)
class PropagatorConfig:
    grid: Grid = field(default_factory=lambda: Grid(128, 128, 8.0, 8.0))
    n_steps: int = 2048
    split_order: str = "strang"
    dump_every: int = 0
    dump_prefix: str | None = None

    def __post_init__(self):
        if self.split_order != "strang":
            raise ConfigError("only second-order Strang splitting is supported")
        if self.n_steps < MIN_STEPS:
            raise ConfigError(f"n_steps must be >= {MIN_STEPS} (dt <= T/{MIN_STEPS})")
        if self.dump_every and not self.dump_prefix:
            raise ConfigError("dump_every needs a dump_prefix")

    def dt(self, params):
        return params.period / self.n_steps


class SplitStepPropagator:
    """Precomputed phase tables for one (grid, dt, params) combination."""

    def __init__(self, config, params, backend=None):
        self.config = config
        self.params = params
        self.kern = _kernels.active if backend is None else _kernels.load(backend)
        self.workers = max_workers()
        g = config.grid
        dt = config.dt(params)
        self.dt = dt
        hbar, M, w, eps = params.hbar, params.mass, params.omega_B, params.epsilon
        x = g.x[:, None]
        y = g.y[None, :]
        kx = g.kx[:, None]
        ky = g.ky[None, :]

        ones = np.ones(g.shape)
        self.kinetic = (hbar**2 * (kx**2 + ky**2) / (2 * M)) * ones
        self.potential = (M * w**2 * (x**2 + y**2) / 8) * ones
        # coupling terms as expectation weights: -(eps w/2) x p_y and +(eps w/2) y p_x
        self.xpy = (-0.5 * eps * w * hbar * x * ky) * ones
        self.ypx = (0.5 * eps * w * hbar * kx * y) * ones

        def phase(energy, tau):
            return np.ascontiguousarray(np.exp(-1j * tau * energy / hbar))

        self.half_kinetic = phase(self.kinetic, dt / 2)
        self.half_potential = phase(self.potential, dt / 2)
        self.half_xpy = phase(self.xpy, dt / 2)
        self.full_ypx = phase(self.ypx, dt)

    # -- transforms ----------------------------------------------------------

    def _fft(self, psi, axes):
        return np.ascontiguousarray(scipy.fft.fftn(psi, axes=axes, workers=self.workers, overwrite_x=True))

    def _ifft(self, psi, axes):
        return np.ascontiguousarray(scipy.fft.ifftn(psi, axes=axes, workers=self.workers, overwrite_x=True))

    def transforms(self, psi):
        """psi over (k_x, k_y), (x, k_y) and (k_x, y); the first feeds ``step_spectral``."""
        w = self.workers
        along_y = scipy.fft.fft(psi, axis=1, workers=w)
        along_x = scipy.fft.fft(psi, axis=0, workers=w)
        spec = scipy.fft.fft(along_y, axis=0, workers=w)
        return spec, along_y, along_x

    def step_spectral(self, spec):
        """Advance by one dt given fft2(psi); returns psi in real space.

        ``spec`` is consumed.
        """
        k = self.kern
        k.mul_inplace(spec, self.half_kinetic)
        psi = self._ifft(spec, (0, 1))
        k.mul_inplace(psi, self.half_potential)
        psi = self._fft(psi, (1,))
        k.mul_inplace(psi, self.half_xpy)
        psi = self._ifft(psi, (1,))
        psi = self._fft(psi, (0,))
        k.mul_inplace(psi, self.full_ypx)
        psi = self._ifft(psi, (0,))
        psi = self._fft(psi, (1,))
        k.mul_inplace(psi, self.half_xpy)
        psi = self._ifft(psi, (1,))
        k.mul_inplace(psi, self.half_potential)
        psi = self._fft(psi, (0, 1))
        k.mul_inplace(psi, self.half_kinetic)
        return self._ifft(psi, (0, 1))

    def step(self, psi):
        """Advance a complex array by one dt (returns a new array)."""
        return self.step_spectral(self._fft(np.array(psi, dtype=complex), (0, 1)))

    def energy_from(self, psi, spec, along_y, along_x):
        terms = self.kern.energy_terms(
            psi, spec, along_y, along_x, self.kinetic, self.potential, self.xpy, self.ypx
        )
        return float(sum(terms))

    def energy(self, psi):
        """<H>, each term evaluated in the representation where it is diagonal."""
        psi = np.ascontiguousarray(psi, dtype=complex)
        return self.energy_from(psi, *self.transforms(psi))


def strang_step(field, config, params, backend=None):
    prop = SplitStepPropagator(config, params, backend)
    out = GridField(prop.step(field.values.copy()), field.grid)
    out.check_boundary("after one step")
    return out


@dataclass(frozen=True, eq=False)
class CycleResult:
    fieldT: GridField
    total_phase: float
    dynamic_phase: float
    geometric_phase: float
    overlap_abs: float
    norm_drift: float
    energy_drift: float
    energies: np.ndarray
    trajectory: Trajectory

    def to_dict(self):
        return to_jsonable(
            {
                "total_phase": self.total_phase,
                "dynamic_phase": self.dynamic_phase,
                "geometric_phase": self.geometric_phase,
                "overlap_abs": self.overlap_abs,
                "norm_drift": self.norm_drift,
                "energy_drift": self.energy_drift,
            }
        )


def propagate_cycle(field0, config, params, backend=None):
    """Run one cyclotron period on the grid and extract the cycle phases."""
    if field0.grid != config.grid:
        raise ConfigError("field grid and propagator grid differ")
    field0 = field0.normalized()
    field0.check_boundary("initial field")
    prop = SplitStepPropagator(config, params, backend)
    kern = prop.kern
    cell = config.grid.cell_area
    n_steps = config.n_steps
    sample_at = set(np.rint(np.linspace(0, n_steps, TRAJECTORY_SAMPLES + 1)).astype(int).tolist())

    psi = np.ascontiguousarray(field0.values.copy())
    energies = np.empty(n_steps + 1)
    times, xs, ys = [], [], []
    for i in range(n_steps + 1):
        spec, along_y, along_x = prop.transforms(psi)
        energies[i] = prop.energy_from(psi, spec, along_y, along_x)
        if i in sample_at:
            norm, sx, sy = kern.moments(psi, config.grid.x, config.grid.y)
            times.append(i * prop.dt)
            xs.append(sx / norm)
            ys.append(sy / norm)
            edge = kern.frame_max_abs2(psi) / (norm * cell) if norm else 0.0
            if edge > BOUNDARY_DENSITY:
                raise BoundaryError(f"packet reached the grid edge at step {i} (density {edge:.2e})")
        if config.dump_every and i % config.dump_every == 0:
            GridField(psi, config.grid).save(f"{config.dump_prefix}{i:06d}.lpgf")
        if i < n_steps:
            psi = prop.step_spectral(spec)

    fieldT = GridField(psi, config.grid)
    overlap = kern.vdot(field0.values, psi) * cell
    if abs(overlap) < MIN_CYCLE_OVERLAP:
        raise NumericalError(
            f"|<psi(0)|psi(T)>| = {abs(overlap):.4f}; the integrator lost the cycle"
        )
    total = wrap_phase(np.angle(overlap))
    dynamic = -float(np.trapezoid(energies, dx=prop.dt)) / params.hbar
    traj = Trajectory(np.array(times), np.array(xs), np.array(ys), None, None, params)
    return CycleResult(
        fieldT=fieldT,
        total_phase=total,
        dynamic_phase=dynamic,
        geometric_phase=wrap_phase(total - dynamic),
        overlap_abs=abs(overlap),
        norm_drift=abs(fieldT.norm_sq() - 1.0),
        energy_drift=float(np.ptp(energies) / max(abs(energies[0]), 1e-300)),
        energies=energies,
        trajectory=traj,
    )


@dataclass(frozen=True)
class ValidationThresholds:
    total_phase: float = 1e-2
    dynamic_phase: float = 2e-2
    geometric_phase: float = 2e-2
    trajectory: float = 1e-2
    infidelity: float = 1e-2


@dataclass(frozen=True)
class ValidationReport:
    state: dict
    analytic: dict
    numeric: dict
    total_phase_discrepancy: float
    dynamic_phase_discrepancy: float
    geometric_phase_discrepancy: float
    trajectory_max_deviation: float
    final_infidelity: float
    synthesis_norm: float
    thresholds: ValidationThresholds = ValidationThresholds()

    @property
    def passed(self):
        t = self.thresholds
        return (
            self.total_phase_discrepancy <= t.total_phase
            and self.dynamic_phase_discrepancy <= t.dynamic_phase
            and self.geometric_phase_discrepancy <= t.geometric_phase
            and self.trajectory_max_deviation <= t.trajectory
            and self.final_infidelity <= t.infidelity
        )

    def to_dict(self):
        t = self.thresholds
        return to_jsonable(
            {
                "state": self.state,
                "analytic": self.analytic,
                "numeric": self.numeric,
                "total_phase_discrepancy": self.total_phase_discrepancy,
                "dynamic_phase_discrepancy": self.dynamic_phase_discrepancy,
                "geometric_phase_discrepancy": self.geometric_phase_discrepancy,
                "trajectory_max_deviation": self.trajectory_max_deviation,
                "final_infidelity": self.final_infidelity,
                "synthesis_norm": self.synthesis_norm,
                "thresholds": {
                    "total_phase": t.total_phase,
                    "dynamic_phase": t.dynamic_phase,
                    "geometric_phase": t.geometric_phase,
                    "trajectory": t.trajectory,
                    "infidelity": t.infidelity,
                },
                "passed": self.passed,
            }
        )


def cross_validate(spec, config, params, trunc, backend=None, thresholds=None):
    """Run a state through the analytic engine and the grid propagator and compare."""
    state = make_state(spec, params, trunc)
    report = phase_report(state, params)
    grid = config.grid

    raw0 = synthesize_state(state, grid, params)
    synthesis_norm = raw0.norm_sq()
    result = propagate_cycle(raw0, config, params, backend)

    beta_a, beta_b, _ = ladder_means(state)
    xc, yc = closed_form_center(beta_a, beta_b, result.trajectory.times, params)
    traj_dev = float(
        max(np.abs(result.trajectory.x - xc).max(), np.abs(result.trajectory.y - yc).max())
    )

    analyticT = synthesize_state(evolve(state, params.period, params), grid, params).normalized()
    numericT = result.fieldT.normalized()
    infidelity = 1.0 - abs(analyticT.inner(numericT))

    return ValidationReport(
        state=spec.to_dict(),
        analytic={
            "total_phase": report.total_phase,
            "dynamic_phase": report.dynamic_phase,
            "geometric_phase": report.geometric_phase,
        },
        numeric=result.to_dict(),
        total_phase_discrepancy=circular_distance(report.total_phase, result.total_phase),
        dynamic_phase_discrepancy=abs(report.dynamic_phase - result.dynamic_phase),
        geometric_phase_discrepancy=circular_distance(report.geometric_phase, result.geometric_phase),
        trajectory_max_deviation=traj_dev,
        final_infidelity=float(infidelity),
        synthesis_norm=float(synthesis_norm),
        thresholds=thresholds or ValidationThresholds(),
    )


def phase_error(result, expected_total=math.pi):
    return circular_distance(result.total_phase, expected_total)
