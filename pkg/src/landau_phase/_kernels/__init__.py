"""Grid kernels: compiled Cython core with a numpy fallback.

The backend is picked once at import.  ``LANDAU_PHASE_BACKEND`` may be
``auto`` (default: compiled if importable), ``cython`` (fail if the
extension is missing) or ``python``.
"""

import importlib
import os

BACKEND_ENV = "LANDAU_PHASE_BACKEND"
_MODULES = {"cython": "._ckernels", "python": "._fallback"}


def load(name):
    """Import a specific backend module by name."""
    if name not in _MODULES:
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(_MODULES[name], __name__)


def available():
    names = ["python"]
    try:
        load("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def _select():
    requested = os.environ.get(BACKEND_ENV, "auto").strip().lower() or "auto"
    if requested == "python":
        return "python", load("python")
    try:
        return "cython", load("cython")
    except ImportError:
        if requested == "cython":
            raise
        return "python", load("python")


BACKEND, active = _select()

sum_abs2 = active.sum_abs2
weighted_abs2 = active.weighted_abs2
vdot = active.vdot
mul_inplace = active.mul_inplace
moments = active.moments
frame_max_abs2 = active.frame_max_abs2
energy_terms = active.energy_terms
