# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid kernels for the real-space propagator.

Complex arrays are walked through float64 views (re, im interleaved) so
the arithmetic stays in plain doubles; C99 complex multiply would route
through the NaN-safe ``__muldc3`` helper.  Every reduction is a single
fixed row-major pass, so results are bit-reproducible for a given build.
"""

import numpy as np


cdef inline double[:, ::1] _re(object a):
    return a.view(np.float64)


def _check(object a, object b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def sum_abs2(object psi):
    cdef double[:, ::1] p = _re(psi)
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    for i in range(p.shape[0]):
        for j in range(p.shape[1]):
            acc += p[i, j] * p[i, j]
    return acc


def weighted_abs2(object psi, double[:, ::1] weights):
    _check(psi, weights)
    cdef double[:, ::1] p = _re(psi)
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, re, im
    for i in range(weights.shape[0]):
        for j in range(weights.shape[1]):
            re = p[i, 2 * j]
            im = p[i, 2 * j + 1]
            acc += weights[i, j] * (re * re + im * im)
    return acc


# numpy's SIMD ufunc loop and BLAS zdotc beat any scalar loop here; the
# compiled module keeps the fused reductions below.
def vdot(object a, object b):
    _check(a, b)
    return complex(np.vdot(a, b))


def mul_inplace(object psi, object phase):
    _check(psi, phase)
    np.multiply(psi, phase, out=psi)


def moments(object psi, double[::1] x, double[::1] y):
    cdef double[:, ::1] p = _re(psi)
    if x.shape[0] != p.shape[0] or 2 * y.shape[0] != p.shape[1]:
        raise ValueError("coordinate lengths do not match the field")
    cdef Py_ssize_t i, j
    cdef double norm = 0.0, sx = 0.0, sy = 0.0, col, rho, re, im
    for i in range(p.shape[0]):
        col = 0.0
        for j in range(y.shape[0]):
            re = p[i, 2 * j]
            im = p[i, 2 * j + 1]
            rho = re * re + im * im
            col += rho
            sy += y[j] * rho
        norm += col
        sx += x[i] * col
    return norm, sx, sy


def frame_max_abs2(object psi):
    cdef double[:, ::1] p = _re(psi)
    cdef Py_ssize_t i, j, n0 = p.shape[0], n1 = p.shape[1] // 2
    cdef double best = 0.0, rho
    for j in range(n1):
        rho = p[0, 2 * j] ** 2 + p[0, 2 * j + 1] ** 2
        if rho > best:
            best = rho
        rho = p[n0 - 1, 2 * j] ** 2 + p[n0 - 1, 2 * j + 1] ** 2
        if rho > best:
            best = rho
    for i in range(n0):
        rho = p[i, 0] ** 2 + p[i, 1] ** 2
        if rho > best:
            best = rho
        rho = p[i, 2 * n1 - 2] ** 2 + p[i, 2 * n1 - 1] ** 2
        if rho > best:
            best = rho
    return best


def energy_terms(object psi, object spec, object along_y, object along_x,
                 double[:, ::1] kinetic, double[:, ::1] potential,
                 double[:, ::1] xpy, double[:, ::1] ypx):
    """Normalized <K>, <V>, <x p_y term>, <y p_x term> in one pass.

    ``spec``, ``along_y`` and ``along_x`` are psi transformed over both
    axes, axis 1 and axis 0; each term is weighted in its own
    representation and divided by that representation's norm.
    """
    _check(psi, spec)
    _check(psi, along_y)
    _check(psi, along_x)
    _check(kinetic, potential)
    cdef double[:, ::1] p = _re(psi)
    cdef double[:, ::1] s = _re(spec)
    cdef double[:, ::1] fy = _re(along_y)
    cdef double[:, ::1] fx = _re(along_x)
    cdef Py_ssize_t i, j, n0 = kinetic.shape[0], n1 = kinetic.shape[1]
    cdef double n_p = 0.0, n_s = 0.0, n_y = 0.0, n_x = 0.0
    cdef double e_k = 0.0, e_v = 0.0, e_y = 0.0, e_x = 0.0, r
    for i in range(n0):
        for j in range(n1):
            r = p[i, 2 * j] ** 2 + p[i, 2 * j + 1] ** 2
            n_p += r
            e_v += potential[i, j] * r
            r = s[i, 2 * j] ** 2 + s[i, 2 * j + 1] ** 2
            n_s += r
            e_k += kinetic[i, j] * r
            r = fy[i, 2 * j] ** 2 + fy[i, 2 * j + 1] ** 2
            n_y += r
            e_y += xpy[i, j] * r
            r = fx[i, 2 * j] ** 2 + fx[i, 2 * j + 1] ** 2
            n_x += r
            e_x += ypx[i, j] * r
    return e_k / n_s, e_v / n_p, e_y / n_y, e_x / n_x
