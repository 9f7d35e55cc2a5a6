"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--size 128] [--repeat 7] [--steps 1024]

Each kernel is timed on a random complex grid (best of ``--repeat``), then a
full propagator cycle is timed with each backend.  Results from the two
backends are checked against each other before timing.
"""

import argparse
import json
import time
import timeit

import numpy as np

from landau_phase import _kernels
from landau_phase.fock import PhysicalParams
from landau_phase.oracle import PropagatorConfig, SplitStepPropagator, propagate_cycle
from landau_phase.realspace import Grid, displace_wavefunction, ground_state


def kernel_cases(n, rng):
    psi = np.ascontiguousarray(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    other = np.ascontiguousarray(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    weight = rng.normal(size=(n, n))
    x = np.linspace(-8, 8, n)
    phase = np.exp(1j * weight)
    prop = SplitStepPropagator(
        PropagatorConfig(grid=Grid(n, n, 8.0, 8.0), n_steps=1024), PhysicalParams(), "python"
    )
    spec, along_y, along_x = prop.transforms(psi)
    tables = (prop.kinetic, prop.potential, prop.xpy, prop.ypx)
    return {
        "sum_abs2": lambda k: k.sum_abs2(psi),
        "weighted_abs2": lambda k: k.weighted_abs2(psi, weight),
        "vdot": lambda k: k.vdot(psi, other),
        "mul_inplace": lambda k: k.mul_inplace(other, phase),
        "moments": lambda k: k.moments(psi, x, x),
        "frame_max_abs2": lambda k: k.frame_max_abs2(psi),
        "energy_terms": lambda k: k.energy_terms(psi, spec, along_y, along_x, *tables),
    }


def time_call(func, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(func, number=1), 1e-7)))
    return min(timeit.repeat(func, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--repeat", type=int, default=7)
    parser.add_argument("--steps", type=int, default=1024)
    parser.add_argument("--json", help="also write results to this file")
    args = parser.parse_args(argv)

    backends = _kernels.available()
    print(f"backends available: {', '.join(backends)}; default: {_kernels.BACKEND}")
    mods = {name: _kernels.load(name) for name in backends}
    cases = kernel_cases(args.size, np.random.default_rng(0))

    results = {"size": args.size, "kernels": {}, "cycle": {}}
    header = f"{'kernel':<16}" + "".join(f"{b + ' [us]':>16}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, case in cases.items():
        if name != "mul_inplace" and len(backends) == 2:
            a, b = (np.asarray(case(mods[k]), dtype=complex) for k in backends)
            assert np.allclose(a, b, rtol=1e-12, atol=1e-9), f"{name}: backends disagree"
        times = {b: time_call(lambda m=mods[b]: case(m), args.repeat) for b in backends}
        results["kernels"][name] = times
        row = f"{name:<16}" + "".join(f"{times[b] * 1e6:>16.1f}" for b in backends)
        if len(backends) == 2:
            row += f"{times['python'] / times['cython']:>9.2f}x"
        print(row)

    params = PhysicalParams()
    config = PropagatorConfig(grid=Grid(args.size, args.size, 8.0, 8.0), n_steps=args.steps)
    psi0 = displace_wavefunction(ground_state(config.grid, params), 1.0, params)
    print(f"\nfull cycle, {args.size}x{args.size}, {args.steps} steps (best of 3)")
    for b in backends:
        best = float("inf")
        for _ in range(3):
            start = time.perf_counter()
            res = propagate_cycle(psi0, config, params, backend=b)
            best = min(best, time.perf_counter() - start)
        results["cycle"][b] = {"seconds": best, "total_phase": res.total_phase}
        print(f"  {b:<8} {best:8.3f} s   total phase {res.total_phase:.12f}")

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
