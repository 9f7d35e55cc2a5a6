import os
import subprocess
import sys

import numpy as np
import pytest

from landau_phase import _kernels

fallback = _kernels.load("python")
needs_compiled = pytest.mark.skipif(
    "cython" not in _kernels.available(), reason="compiled extension not built"
)


@pytest.fixture(params=_kernels.available())
def kern(request):
    return _kernels.load(request.param)


@pytest.fixture
def data():
    rng = np.random.default_rng(1)
    shape = (32, 16)
    psi = np.ascontiguousarray(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    other = np.ascontiguousarray(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    w = np.ascontiguousarray(rng.normal(size=shape))
    return psi, other, w, np.linspace(-1, 1, 32), np.linspace(-2, 2, 16)


def test_sum_abs2(kern, data):
    psi = data[0]
    assert kern.sum_abs2(psi) == pytest.approx(np.sum(np.abs(psi) ** 2), rel=1e-13)


def test_weighted_abs2(kern, data):
    psi, _, w, _, _ = data
    assert kern.weighted_abs2(psi, w) == pytest.approx(np.sum(w * np.abs(psi) ** 2), rel=1e-12)


def test_vdot(kern, data):
    psi, other, *_ = data
    assert kern.vdot(psi, other) == pytest.approx(np.vdot(psi, other), rel=1e-13)


def test_mul_inplace(kern, data):
    psi, other, *_ = data
    target = psi.copy()
    kern.mul_inplace(target, other)
    assert np.array_equal(target, psi * other)


def test_moments(kern, data):
    psi, _, _, x, y = data
    rho = np.abs(psi) ** 2
    n, sx, sy = kern.moments(psi, x, y)
    assert n == pytest.approx(rho.sum(), rel=1e-13)
    assert sx == pytest.approx(np.sum(rho * x[:, None]), rel=1e-12, abs=1e-12)
    assert sy == pytest.approx(np.sum(rho * y[None, :]), rel=1e-12, abs=1e-12)


def test_frame_max(kern, data):
    psi = data[0].copy()
    psi[5:-5, 5:-5] = 100.0
    rho = np.abs(psi) ** 2
    frame = max(rho[0].max(), rho[-1].max(), rho[:, 0].max(), rho[:, -1].max())
    assert kern.frame_max_abs2(psi) == frame


def test_energy_terms_parity(kern, data):
    psi, other, w, *_ = data
    args = (psi, other, psi[::-1].copy(), other[::-1].copy(), np.abs(w), w, 2 * w, -w)
    assert np.allclose(kern.energy_terms(*args), fallback.energy_terms(*args), rtol=1e-12)


def test_zero_field(kern):
    z = np.zeros((8, 8), dtype=complex)
    assert kern.sum_abs2(z) == 0
    assert kern.frame_max_abs2(z) == 0


@needs_compiled
def test_compiled_rejects_mismatched_shapes():
    ck = _kernels.load("cython")
    with pytest.raises((ValueError, TypeError)):
        ck.vdot(np.zeros((4, 4), complex), np.zeros((4, 2), complex))


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.load("fortran")


@pytest.mark.parametrize("choice", ["python", "auto"])
def test_env_selects_backend(choice):
    env = dict(os.environ, LANDAU_PHASE_BACKEND=choice)
    out = subprocess.run(
        [sys.executable, "-c", "from landau_phase import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.strip()
    expected = "python" if choice == "python" else _kernels.available()[0]
    assert out == expected
