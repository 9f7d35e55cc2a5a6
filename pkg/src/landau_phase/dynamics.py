"""Exact cyclotron evolution, cycle phases and the orbit of the packet center."""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ._util import ordered_map, to_jsonable, wrap_phase
from .errors import ConfigError, NormalizationError, NumericalError, TruncationError
from .fock import (
    TwoModeState,
    build_hamiltonian,
    build_position_momentum,
    expectation,
)
from .states import (
    StateSpec,
    check_adequacy,
    displacement_matrix,
    ladder_means,
    make_state,
    mean_and_variance_a,
)

NORM_TOL = 1e-10
TRAJECTORY_TOL = 1e-6
DEGENERATE_RADIUS = 1e-12


def evolve(state, t, params):
    """Apply exp(-iHt/hbar); every |n n'> only picks up its Landau phase."""
    n = np.arange(state.trunc.n_max_a + 1, dtype=float)[:, None]
    phases = np.exp(-1j * params.omega_B * t * (n + 0.5))
    return TwoModeState(state.amps * phases, state.trunc)


def _require_normalized(state):
    if not state.is_normalized(NORM_TOL):
        raise NormalizationError(f"state norm^2 is {state.norm_sq:.15g}, expected 1")


@dataclass(frozen=True)
class PhaseReport:
    total_phase: float
    dynamic_phase: float
    geometric_phase: float
    mean_N: float
    mean_a: complex
    delta_a_sq: float
    reduced_flux: float
    decomposition_residual: float
    cycle_fidelity: float

    def to_dict(self, params=None, units="natural"):
        d = {
            "total_phase": self.total_phase,
            "dynamic_phase": self.dynamic_phase,
            "geometric_phase": self.geometric_phase,
            "mean_N": self.mean_N,
            "mean_a": self.mean_a,
            "delta_a_sq": self.delta_a_sq,
            "reduced_flux": self.reduced_flux,
            "extra_term": 2.0 * math.pi * self.delta_a_sq,
            "decomposition_residual": self.decomposition_residual,
            "cycle_fidelity": self.cycle_fidelity,
        }
        if params is not None:
            d["flux"] = flux_from_reduced(self.reduced_flux, params, units)
            d["units"] = units
        return to_jsonable(d)


def flux_from_reduced(reduced_flux, params, units="natural"):
    """Phi = (hbar c / q) * reduced flux; the sign of q enters via epsilon."""
    scale = params.flux_unit if units == "physical" else 1.0
    return params.epsilon * scale * reduced_flux


def dynamic_phase_closed_form(mean_N):
    return -math.pi - 2.0 * math.pi * mean_N


def phase_report(state, params):
    _require_normalized(state)
    period = params.period
    overlap = state.overlap(evolve(state, period, params))
    total = wrap_phase(np.angle(overlap))

    mean_h = expectation(build_hamiltonian(params, state.trunc), state)
    dynamic = -period * mean_h / params.hbar
    mv = mean_and_variance_a(state)
    _, _, mean_n = ladder_means(state)
    closed = dynamic_phase_closed_form(mean_n)
    if abs(dynamic - closed) > 1e-9 * max(1.0, abs(closed)):
        raise NumericalError(f"dynamic phase {dynamic!r} disagrees with closed form {closed!r}")

    geometric = wrap_phase(total - dynamic)
    reduced_flux = -2.0 * math.pi * abs(mv["mean_a"]) ** 2
    residual = wrap_phase(geometric + reduced_flux - 2.0 * math.pi * mv["delta_a_sq"])
    return PhaseReport(
        total_phase=total,
        dynamic_phase=dynamic,
        geometric_phase=geometric,
        mean_N=mean_n,
        mean_a=mv["mean_a"],
        delta_a_sq=mv["delta_a_sq"],
        reduced_flux=reduced_flux,
        decomposition_residual=residual,
        cycle_fidelity=abs(overlap),
    )


def dynamic_phase_quadrature(state, params, n_samples=64):
    """-(1/hbar) * trapezoid integral of <H>_t over one cycle."""
    times = np.linspace(0.0, params.period, n_samples)
    ham = build_hamiltonian(params, state.trunc)
    energies = ordered_map(lambda t: expectation(ham, evolve(state, t, params)), times)
    return -float(np.trapezoid(energies, times)) / params.hbar


def enclosed_flux(state, params, units="natural"):
    _require_normalized(state)
    mean_a, _, _ = ladder_means(state)
    reduced = -2.0 * math.pi * abs(mean_a) ** 2
    return {"flux": flux_from_reduced(reduced, params, units), "reduced_flux": reduced}


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    # closed-form columns are absent for grid-propagated trajectories
    x_closed: np.ndarray | None
    y_closed: np.ndarray | None
    params: object
    max_discrepancy: float = 0.0

    @property
    def samples(self):
        return list(zip(self.times.tolist(), self.x.tolist(), self.y.tolist()))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "x_closed", "y_closed"])
        n = len(self.times)
        xc = self.x_closed if self.x_closed is not None else [None] * n
        yc = self.y_closed if self.y_closed is not None else [None] * n
        for row in zip(self.times, self.x, self.y, xc, yc):
            w.writerow(["" if v is None else repr(float(v)) for v in row])
        return buf.getvalue()


def closed_form_center(beta_a, beta_b, times, params):
    """Center of the packet from <a>_0 and <b>_0 alone."""
    s = params.orbit_scale
    eps = params.epsilon
    r = abs(beta_a)
    phase = params.omega_B * np.asarray(times) - np.angle(beta_a)
    x = s * beta_b.real + s * r * np.cos(phase)
    y = -eps * s * beta_b.imag - eps * s * r * np.sin(phase)
    return x, y


def center_trajectory(state, params, n_samples=65):
    """Sample <x>, <y> over one cycle by matrix expectations and in closed form.

    Raises TruncationError when the two disagree by more than 1e-6, which
    only happens if amplitude has leaked to the truncation edge.
    """
    _require_normalized(state)
    if n_samples < 8:
        raise ConfigError("center_trajectory needs at least 8 samples")
    times = np.linspace(0.0, params.period, n_samples)
    ops = build_position_momentum(params, state.trunc)
    xop, yop = ops["x"], ops["y"]

    def sample(t):
        psi = evolve(state, t, params)
        return expectation(xop, psi), expectation(yop, psi)

    xy = np.array(ordered_map(sample, times))
    beta_a, beta_b, _ = ladder_means(state)
    xc, yc = closed_form_center(beta_a, beta_b, times, params)
    gap = float(max(np.abs(xy[:, 0] - xc).max(), np.abs(xy[:, 1] - yc).max()))
    if gap > TRAJECTORY_TOL:
        raise TruncationError(
            f"matrix and closed-form trajectories differ by {gap:.3e}; truncation is leaking"
        )
    return Trajectory(times, xy[:, 0], xy[:, 1], xc, yc, params, gap)


@dataclass(frozen=True)
class CircleFit:
    center: tuple
    radius: float
    angular_frequency: float
    handedness: str
    rms_residual: float
    degenerate: bool = False

    def to_dict(self):
        return to_jsonable(
            {
                "center": list(self.center),
                "radius": self.radius,
                "angular_frequency": self.angular_frequency,
                "handedness": self.handedness,
                "rms_residual": self.rms_residual,
                "degenerate": self.degenerate,
            }
        )


def fit_circle_points(times, x, y):
    """Algebraic (Kasa) circle fit plus polar-angle regression."""
    times = np.asarray(times, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 8:
        raise ConfigError("circle fit needs at least 8 samples")
    # work relative to the centroid to keep the normal equations well scaled
    x0, y0 = x.mean(), y.mean()
    u, v = x - x0, y - y0
    spread = float(np.sqrt(u**2 + v**2).max())
    if spread < DEGENERATE_RADIUS:
        return CircleFit((float(x0), float(y0)), 0.0, 0.0, "undefined", spread, True)

    A = np.column_stack([2 * u, 2 * v, np.ones_like(u)])
    sol, *_ = np.linalg.lstsq(A, u**2 + v**2, rcond=None)
    uc, vc, c = sol
    radius = float(np.sqrt(max(c + uc**2 + vc**2, 0.0)))
    center = (float(x0 + uc), float(y0 + vc))
    dist = np.hypot(u - uc, v - vc)
    rms = float(np.sqrt(np.mean((dist - radius) ** 2)))
    if radius < DEGENERATE_RADIUS:
        return CircleFit(center, 0.0, 0.0, "undefined", rms, True)

    theta = np.unwrap(np.arctan2(v - vc, u - uc))
    slope = float(np.polyfit(times, theta, 1)[0])
    handedness = "clockwise" if slope < 0 else "anticlockwise"
    return CircleFit(center, radius, abs(slope), handedness, rms)


def fit_circle(traj, path="matrix"):
    if path == "matrix":
        return fit_circle_points(traj.times, traj.x, traj.y)
    if path == "closed":
        return fit_circle_points(traj.times, traj.x_closed, traj.y_closed)
    raise ConfigError(f"unknown trajectory path {path!r}")


def shape_preservation_check(n, alpha, params, trunc, times):
    """Largest 1 - |<n, alpha e^{-i w t}| psi(t)>| over the given times."""
    check_adequacy(n, alpha, trunc.n_max_a)
    psi0 = make_state(StateSpec.displaced_number(n, alpha), params, trunc)

    def infidelity(t):
        psi_t = evolve(psi0, t, params)
        alpha_t = complex(alpha) * np.exp(-1j * params.omega_B * t)
        d = displacement_matrix(alpha_t, trunc, check=False).entries
        ref = np.zeros(trunc.shape, dtype=complex)
        ref[:, 0] = d[:, n]
        return 1.0 - abs(np.vdot(ref.ravel(), psi_t.vector))

    return float(max(ordered_map(infidelity, list(times))))


__all__ = [
    "CircleFit",
    "PhaseReport",
    "Trajectory",
    "center_trajectory",
    "dynamic_phase_closed_form",
    "dynamic_phase_quadrature",
    "enclosed_flux",
    "evolve",
    "fit_circle",
    "fit_circle_points",
    "phase_report",
    "shape_preservation_check",
]
