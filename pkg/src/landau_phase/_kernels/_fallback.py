"""Pure-numpy versions of the grid kernels.

Semantics match ``_ckernels`` exactly; only the summation order differs,
so results agree to roundoff.
"""

import numpy as np


def sum_abs2(psi):
    return float(np.sum(psi.real**2 + psi.imag**2))


def weighted_abs2(psi, weights):
    return float(np.sum(weights * (psi.real**2 + psi.imag**2)))


def vdot(a, b):
    return complex(np.vdot(a, b))


def mul_inplace(psi, phase):
    np.multiply(psi, phase, out=psi)


def moments(psi, x, y):
    """(sum |psi|^2, sum x |psi|^2, sum y |psi|^2) with x along axis 0."""
    rho = psi.real**2 + psi.imag**2
    col = rho.sum(axis=1)
    row = rho.sum(axis=0)
    return float(col.sum()), float(col @ x), float(row @ y)


def frame_max_abs2(psi):
    rho = psi.real**2 + psi.imag**2
    return float(max(rho[0].max(), rho[-1].max(), rho[:, 0].max(), rho[:, -1].max()))


def energy_terms(psi, spec, along_y, along_x, kinetic, potential, xpy, ypx):
    def term(f, w):
        rho = f.real**2 + f.imag**2
        return float(np.sum(w * rho) / np.sum(rho))

    return term(spec, kinetic), term(psi, potential), term(along_y, xpy), term(along_x, ypx)
