"""Invariant suite behind ``landau-phase suite``.

Every check measures one number and compares it with a tolerance; the
table lists the measured value so a near miss is visible at a glance.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from ._util import circular_distance, to_jsonable
from .dynamics import (
    center_trajectory,
    dynamic_phase_closed_form,
    dynamic_phase_quadrature,
    evolve,
    fit_circle,
    phase_report,
)
from .fock import (
    FockTruncation,
    PhysicalParams,
    build_angular_momentum,
    build_hamiltonian,
    build_ladder,
    build_number,
    build_position_momentum,
    canonical_angular_momentum,
    commutator,
    expectation,
    symmetric_gauge_hamiltonian,
)
from .oracle import PropagatorConfig, SplitStepPropagator, phase_error, propagate_cycle
from .realspace import (
    Grid,
    GridField,
    HolomorphicPoly,
    apply_ladder_grid,
    displace_wavefunction,
    ground_state,
    number_wavefunction,
    project_to_fock,
)
from .states import (
    StateSpec,
    displacement_matrix,
    make_state,
    mean_and_variance_a,
    safe_levels,
)


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    value: float
    tolerance: float
    passed: bool
    seconds: float
    comparison: str = "<="

    def to_dict(self):
        return to_jsonable(self.__dict__)


_CHECKS = []


def check(module, name, tolerance, comparison="<="):
    def register(func):
        _CHECKS.append((module, name, tolerance, comparison, func))
        return func

    return register


def _max_abs(m):
    return float(np.abs(m).max()) if m.size else 0.0


def _random_states(seed, count, trunc, params):
    return [make_state(StateSpec.random(seed + i), params, trunc) for i in range(count)]


# -- fock-core ---------------------------------------------------------------


@check("fock", "ladder commutators on the safe subspace", 1e-12)
def _commutators(seed):
    trunc = FockTruncation(12, 12)
    a, b = build_ladder("a", trunc), build_ladder("b", trunc)
    mask = trunc.safe_mask(1, 1)
    eye = np.eye(int(mask.sum()))
    errs = [
        _max_abs(commutator(a, a.dagger).restrict(mask) - eye),
        _max_abs(commutator(b, b.dagger).restrict(mask) - eye),
        _max_abs(commutator(a, b).restrict(mask)),
        _max_abs(commutator(a, b.dagger).restrict(mask)),
    ]
    return max(errs)


@check("fock", "symmetric-gauge H equals w(N + 1/2)", 1e-10)
def _hamiltonians(seed):
    errs = []
    for eps in (1, -1):
        params = PhysicalParams(epsilon=eps, omega_B=1.7)
        trunc = FockTruncation(12, 12)
        mask = trunc.safe_mask(2, 2)
        diff = symmetric_gauge_hamiltonian(params, trunc).restrict(mask) - build_hamiltonian(
            params, trunc
        ).restrict(mask)
        errs.append(_max_abs(diff))
    return max(errs)


@check("fock", "x p_y - y p_x equals eps (N' - N)", 1e-10)
def _angular(seed):
    errs = []
    for eps in (1, -1):
        params = PhysicalParams(epsilon=eps)
        trunc = FockTruncation(12, 12)
        mask = trunc.safe_mask(2, 2)
        diff = canonical_angular_momentum(params, trunc).restrict(mask) - build_angular_momentum(
            params, trunc
        ).restrict(mask)
        errs.append(_max_abs(diff))
    return max(errs)


@check("fock", "x, y, p_x, p_y exactly Hermitian", 0.0)
def _hermitian(seed):
    ops = build_position_momentum(PhysicalParams(), FockTruncation(10, 10))
    return max(_max_abs(op.entries - op.entries.conj().T) for op in ops.values())


@check("fock", "N, N', L_z commute with H", 0.0)
def _conserved(seed):
    params = PhysicalParams()
    trunc = FockTruncation(10, 10)
    h = build_hamiltonian(params, trunc)
    ops = [build_number("a", trunc), build_number("b", trunc), build_angular_momentum(params, trunc)]
    return max(_max_abs(commutator(op, h).entries) for op in ops)


# -- states ------------------------------------------------------------------


@check("states", "D(alpha) unitary on the safe subspace", 1e-8)
def _unitary(seed):
    trunc = FockTruncation(60, 0)
    errs = []
    for alpha in (0.5, 1 + 1j, 2 * np.exp(1j * np.pi / 3)):
        d = displacement_matrix(alpha, trunc)
        errs.append(d.unitarity_defect(safe_levels(alpha, trunc.n_max_a)))
    return max(errs)


@check("states", "D(alpha) D(-alpha) = 1 on the safe subspace", 1e-8)
def _inverse(seed):
    trunc = FockTruncation(60, 0)
    errs = []
    for alpha in (0.5, 1 + 1j, 1.5j):
        k = safe_levels(alpha, trunc.n_max_a, depth=2) + 1
        prod = displacement_matrix(alpha, trunc).entries @ displacement_matrix(-alpha, trunc).entries
        errs.append(_max_abs(prod[:k, :k] - np.eye(k)))
    return max(errs)


@check("states", "displaced states sit at the displaced center", 1e-8)
def _displaced_center(seed):
    params = PhysicalParams()
    trunc = FockTruncation(48, 0)
    ops = build_position_momentum(params, trunc)
    errs = []
    for n, alpha in ((0, 1.0), (2, 0.5 + 1j)):
        psi = make_state(StateSpec.displaced_number(n, alpha), params, trunc)
        mean_a = mean_and_variance_a(psi)["mean_a"]
        s = params.orbit_scale
        errs.append(abs(expectation(ops["x"], psi) - s * mean_a.real))
        errs.append(abs(expectation(ops["y"], psi) - params.epsilon * s * mean_a.imag))
        errs.append(abs(mean_a - alpha))
    return max(errs)


@check("states", "(Delta a)^2 unchanged by displacement", 1e-8)
def _variance_invariant(seed):
    params = PhysicalParams()
    trunc = FockTruncation(60, 4)
    rng = np.random.default_rng(seed)
    errs = []
    for i in range(5):
        psi = make_state(StateSpec.random(seed + i, n_max=6), params, trunc)
        beta = complex(rng.normal(), rng.normal())
        d = displacement_matrix(beta, trunc).entries
        moved = type(psi)(d @ psi.amps, trunc)
        errs.append(
            abs(mean_and_variance_a(moved)["delta_a_sq"] - mean_and_variance_a(psi)["delta_a_sq"])
        )
    return max(errs)


# -- dynamics ----------------------------------------------------------------


def _random_reports(seed):
    params = PhysicalParams()
    trunc = FockTruncation(32, 8)
    states = _random_states(seed, 100, trunc, params)
    return states, [phase_report(s, params) for s in states]


@check("dynamics", "cycle returns the ray; total phase pi", 1e-12)
def _cyclic(seed):
    _, reports = _random_reports(seed)
    return max(
        max(abs(r.cycle_fidelity - 1.0), circular_distance(r.total_phase, math.pi)) for r in reports
    )


@check("dynamics", "geometric phase equals 2 pi <N>", 1e-9)
def _geometric(seed):
    _, reports = _random_reports(seed)
    return max(circular_distance(r.geometric_phase, 2 * math.pi * r.mean_N) for r in reports)


@check("dynamics", "flux plus extra-term decomposition", 1e-9)
def _decomposition(seed):
    _, reports = _random_reports(seed)
    return max(abs(r.decomposition_residual) for r in reports)


@check("dynamics", "dynamic phase by quadrature matches closed form", 1e-10)
def _quadrature(seed):
    params = PhysicalParams()
    trunc = FockTruncation(16, 4)
    errs = []
    for psi in _random_states(seed, 5, trunc, params):
        mean_n = expectation(build_number("a", trunc), psi)
        errs.append(abs(dynamic_phase_quadrature(psi, params) - dynamic_phase_closed_form(mean_n)))
    return max(errs)


@check("dynamics", "<a>_t and <b>_t follow the Heisenberg solution", 1e-8)
def _heisenberg(seed):
    params = PhysicalParams(omega_B=1.3)
    trunc = FockTruncation(16, 6)
    a, b = build_ladder("a", trunc), build_ladder("b", trunc)
    errs = []
    for psi in _random_states(seed, 3, trunc, params):
        a0, b0 = expectation(a, psi), expectation(b, psi)
        for t in np.linspace(0, params.period, 9):
            psi_t = evolve(psi, t, params)
            errs.append(abs(expectation(a, psi_t) - a0 * np.exp(-1j * params.omega_B * t)))
            errs.append(abs(expectation(b, psi_t) - b0))
    return max(errs)


@check("dynamics", "circle fit recovers radius, center and frequency", 1e-8)
def _circle(seed):
    params = PhysicalParams(omega_B=1.0)
    trunc = FockTruncation(40, 20)
    psi = make_state(StateSpec.coherent(1.5 + 0.5j, b_shift=0.7 - 0.2j), params, trunc)
    fit = fit_circle(center_trajectory(psi, params))
    s = params.orbit_scale
    return max(
        abs(fit.radius - s * abs(1.5 + 0.5j)),
        abs(fit.center[0] - s * 0.7),
        abs(fit.center[1] - s * 0.2),
        abs(fit.angular_frequency - params.omega_B),
    )


# -- realspace ---------------------------------------------------------------

_REAL_GRID = Grid(256, 256, 10.0, 10.0)


@check("realspace", "Gram matrix of psi_n (n <= 6) is the identity", 1e-6)
def _gram(seed):
    params = PhysicalParams()
    fields = [number_wavefunction(n, HolomorphicPoly(), _REAL_GRID, params) for n in range(7)]
    gram = np.array([[f.inner(g) for g in fields] for f in fields])
    return _max_abs(gram - np.eye(7))


@check("realspace", "a annihilates the ground state on the grid", 1e-8)
def _annihilate(seed):
    params = PhysicalParams()
    psi0 = ground_state(_REAL_GRID, params)
    return float(np.abs(apply_ladder_grid("a", psi0, params, check=False).values).max())


@check("realspace", "<a^dag a> = n for any holomorphic f", 1e-6)
def _degeneracy_free(seed):
    params = PhysicalParams()
    grid = Grid(256, 256, 12.0, 12.0)
    errs = []
    for coeffs in ((1.0,), (0.0, 1.0), (1.0, 0.0, 1.0)):
        f = HolomorphicPoly(coeffs)
        for n in range(4):
            psi = number_wavefunction(n, f, grid, params)
            lowered = apply_ladder_grid("a", psi, params, check=False)
            errs.append(abs(lowered.norm_sq() - n))
    return max(errs)


@check("realspace", "displaced Gaussian projects onto coherent amplitudes", 1e-5)
def _projection(seed):
    params = PhysicalParams()
    trunc = FockTruncation(24, 0)
    alpha = 0.8 + 0.6j
    field = displace_wavefunction(ground_state(_REAL_GRID, params), alpha, params)
    proj = project_to_fock(field, params, trunc)
    expected = make_state(StateSpec.coherent(alpha), params, trunc).amps
    # compare up to the global phase, which the grid does not fix
    phase = np.vdot(proj.state.amps.ravel(), expected.ravel())
    phase /= abs(phase)
    return _max_abs(proj.state.amps * phase - expected)


# -- grid-oracle -------------------------------------------------------------

_oracle_cache = {}


def _coherent_cycle(n_steps):
    if n_steps not in _oracle_cache:
        params = PhysicalParams()
        config = PropagatorConfig(n_steps=n_steps)
        psi = displace_wavefunction(ground_state(config.grid, params), 1.0, params)
        _oracle_cache[n_steps] = propagate_cycle(psi, config, params)
    return _oracle_cache[n_steps]


@check("oracle", "norm drift over one cycle", 1e-10)
def _norm_drift(seed):
    return _coherent_cycle(2048).norm_drift


@check("oracle", "relative <H> drift over one cycle", 1e-6)
def _energy_drift(seed):
    return _coherent_cycle(2048).energy_drift


@check("oracle", "phase error ratio when dt is halved", 3.5, ">=")
def _convergence(seed):
    return phase_error(_coherent_cycle(2048)) / phase_error(_coherent_cycle(4096))


@check("oracle", "one step of the ground state is exp(-i w dt/2)", 1e-8)
def _one_step(seed):
    params = PhysicalParams()
    config = PropagatorConfig(n_steps=2048)
    psi = ground_state(config.grid, params).normalized()
    prop = SplitStepPropagator(config, params)
    stepped = GridField(prop.step(psi.values.copy()), config.grid)
    expected = np.exp(-0.5j * params.omega_B * config.dt(params))
    return abs(psi.inner(stepped) - expected)


# -- cli ---------------------------------------------------------------------


@check("cli", "identical config gives byte-identical output", 0.0)
def _determinism(seed):
    import io

    from .cli import main

    outputs = []
    for _ in range(2):
        run = []
        for argv in (
            ["phase", "--state", '{"kind": "random", "seed": 3}', "--nmax-a", "12", "--nmax-b", "4"],
            ["trajectory", "--state", '{"kind": "coherent", "alpha": [1, 0.5]}', "--format", "csv"],
        ):
            buf = io.StringIO()
            if main(argv, stdout=buf) != 0:
                return 1.0
            run.append(buf.getvalue())
        outputs.append(run)
    return 0.0 if outputs[0] == outputs[1] else 1.0


def run_suite(seed=0, select=None):
    """Run every registered check (or those whose module is in ``select``)."""
    _oracle_cache.clear()
    chosen = [c for c in _CHECKS if select is None or c[0] in select]

    def one(entry):
        module, name, tol, comparison, func = entry
        start = time.perf_counter()
        value = float(func(seed))
        ok = value >= tol if comparison == ">=" else value <= tol
        return CheckResult(module, name, value, tol, bool(ok), time.perf_counter() - start, comparison)

    # the oracle checks share cached cycles, so run sequentially
    results = [one(entry) for entry in chosen]
    _oracle_cache.clear()
    return results


def format_table(results):
    width = max(len(r.name) for r in results) if results else 10
    lines = [f"{'module':<10} {'check':<{width}} {'value':>11}    {'tolerance':<12} result"]
    lines.append("-" * len(lines[0]))
    for r in results:
        tol = f"{r.comparison} {r.tolerance:.1e}"
        lines.append(
            f"{r.module:<10} {r.name:<{width}} {r.value:>11.3e}    {tol:<12} "
            f"{'PASS' if r.passed else 'FAIL'}"
        )
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"


__all__ = ["CheckResult", "format_table", "run_suite"]
