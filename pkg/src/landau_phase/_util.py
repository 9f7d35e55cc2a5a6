import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "LANDAU_PHASE_THREADS"


def wrap_phase(angle):
    """Reduce an angle to the canonical interval (-pi, pi]."""
    w = math.remainder(float(angle), 2.0 * math.pi)
    # remainder() maps odd multiples of pi to -pi half the time
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


def circular_distance(a, b):
    d = abs(math.remainder(float(a) - float(b), 2.0 * math.pi))
    return min(d, 2.0 * math.pi - d)


def max_workers():
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def ordered_map(func, items):
    """map() over a thread pool capped by LANDAU_PHASE_THREADS.

    Results come back in input order, so any reduction done afterwards
    runs in a fixed order regardless of scheduling.
    """
    items = list(items)
    workers = min(max_workers(), len(items)) if items else 1
    if workers <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def complex_to_pair(z):
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(value):
    if isinstance(value, (int, float)):
        return complex(value, 0.0)
    if isinstance(value, complex):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"expected a number or an [re, im] pair, got {value!r}")


def to_jsonable(obj):
    """Recursively convert numpy scalars, arrays and complex numbers."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_pair(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj
