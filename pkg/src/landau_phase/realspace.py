"""Configuration-space wave functions on a periodic 2D grid.

Fields are sampled on ``x = -X + i*dx`` (``i < nx``, endpoint excluded)
and likewise in y; ``values[i, j]`` is the sample at ``(x_i, y_j)``.  The
grid is treated as periodic, so derivatives and translations are done
spectrally and quadrature is the trapezoid rule for periodic integrands
(a plain sum times ``dx*dy``).

The complex coordinate is z = sqrt(M w / 4 hbar) (x + i eps y); in it

    a     = (z  + d/dz*) / sqrt2        b     = (z* + d/dz ) / sqrt2
    a^dag = (z* - d/dz ) / sqrt2        b^dag = (z  - d/dz*) / sqrt2
"""

import struct
from dataclasses import dataclass
from functools import cached_property
from math import comb, factorial

import numpy as np
import scipy.fft
from numpy.polynomial import polynomial as P

from . import _kernels
from ._util import max_workers
from .errors import BoundaryError, ConfigError, DimensionError, TruncationError
from .fock import TwoModeState

BOUNDARY_DENSITY = 1e-8
CAPTURE_MIN = 0.999
LPGF_MAGIC = b"LPGF"
LPGF_VERSION = 1
_HEADER = struct.Struct("<4sIIIdd")


def _is_pow2(n):
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    nx: int = 256
    ny: int = 256
    x_extent: float = 8.0
    y_extent: float = 8.0

    def __post_init__(self):
        if not (_is_pow2(self.nx) and _is_pow2(self.ny)):
            raise ConfigError(f"grid sizes must be powers of two, got {self.nx}x{self.ny}")
        if not (self.x_extent > 0 and self.y_extent > 0):
            raise ConfigError("grid extents must be positive")

    @classmethod
    def for_state(cls, n, alpha, params, nx=256, ny=256):
        """Smallest square grid the sizing rule allows for |n, alpha>."""
        ext = (abs(alpha) + np.sqrt(2 * n + 1) + 4.0) * params.orbit_scale
        return cls(nx, ny, float(ext), float(ext))

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def dx(self):
        return 2.0 * self.x_extent / self.nx

    @property
    def dy(self):
        return 2.0 * self.y_extent / self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @cached_property
    def x(self):
        return -self.x_extent + self.dx * np.arange(self.nx)

    @cached_property
    def y(self):
        return -self.y_extent + self.dy * np.arange(self.ny)

    @cached_property
    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def kx(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    @cached_property
    def ky(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)

    def z(self, params):
        X, Y = self.mesh
        k = np.sqrt(params.mass * params.omega_B / (4.0 * params.hbar))
        return k * (X + 1j * params.epsilon * Y)


@dataclass(frozen=True, eq=False)
class GridField:
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise DimensionError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    nx = property(lambda self: self.grid.nx)
    ny = property(lambda self: self.grid.ny)
    x_extent = property(lambda self: self.grid.x_extent)
    y_extent = property(lambda self: self.grid.y_extent)

    def norm_sq(self):
        return _kernels.sum_abs2(self.values) * self.grid.cell_area

    def normalized(self):
        nrm = np.sqrt(self.norm_sq())
        if nrm == 0.0:
            raise BoundaryError("cannot normalize a zero field")
        return GridField(self.values / nrm, self.grid)

    def inner(self, other):
        """<self|other> by periodic trapezoid quadrature."""
        return _kernels.vdot(self.values, other.values) * self.grid.cell_area

    def edge_density(self):
        """Largest |psi|^2 on the grid frame relative to the total norm."""
        total = self.norm_sq()
        if total == 0.0:
            return 0.0
        return _kernels.frame_max_abs2(self.values) / total

    def check_boundary(self, what="field", tol=BOUNDARY_DENSITY):
        edge = self.edge_density()
        if edge > tol:
            raise BoundaryError(
                f"{what}: density {edge:.3e} at the grid edge exceeds {tol:.0e}; enlarge the grid"
            )
        return self

    def mean_position(self):
        norm, sx, sy = _kernels.moments(self.values, self.grid.x, self.grid.y)
        return sx / norm, sy / norm

    def density(self):
        return self.values.real**2 + self.values.imag**2

    # -- serialisation -------------------------------------------------------

    def to_bytes(self):
        head = _HEADER.pack(
            LPGF_MAGIC, LPGF_VERSION, self.nx, self.ny, self.x_extent, self.y_extent
        )
        body = np.ascontiguousarray(self.values, dtype="<c16").tobytes(order="C")
        return head + body

    @classmethod
    def from_bytes(cls, data):
        if len(data) < _HEADER.size:
            raise ConfigError("truncated LPGF header")
        magic, version, nx, ny, xe, ye = _HEADER.unpack_from(data)
        if magic != LPGF_MAGIC:
            raise ConfigError(f"bad magic {magic!r}, expected {LPGF_MAGIC!r}")
        if version != LPGF_VERSION:
            raise ConfigError(f"unsupported LPGF version {version}")
        expected = _HEADER.size + 16 * nx * ny
        if len(data) != expected:
            raise ConfigError(f"LPGF payload has {len(data)} bytes, expected {expected}")
        values = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(nx, ny)
        return cls(values.astype(complex), Grid(nx, ny, xe, ye))

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def density_csv(self):
        lines = ["x,y,density"]
        rho = self.density().tolist()
        ys = self.grid.y.tolist()
        for i, xv in enumerate(self.grid.x.tolist()):
            row = rho[i]
            for j, yv in enumerate(ys):
                lines.append(f"{xv!r},{yv!r},{row[j]!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HolomorphicPoly:
    """f(z) = sum_k coeffs[k] z^k."""

    coeffs: tuple = (1.0,)

    def __post_init__(self):
        c = tuple(complex(v) for v in self.coeffs)
        if not c or all(v == 0 for v in c):
            raise ConfigError("f(z) must not be identically zero")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        nz = [k for k, v in enumerate(self.coeffs) if v != 0]
        return nz[-1]

    def derivative(self, order=1):
        c = np.array(self.coeffs, dtype=complex)
        return P.polyder(c, order) if order <= len(c) - 1 else np.zeros(1, dtype=complex)

    def __call__(self, z, order=0):
        return P.polyval(z, self.derivative(order) if order else np.array(self.coeffs))


def number_wavefunction(n, f, grid, params, check=True):
    """Landau-level-n wave function generated from the ground state e^{-z*z} f(z).

    Uses the closed form
        d^n/dz^n [e^{-2 z* z} f] = e^{-2 z* z} sum_k C(n,k) (-2 z*)^(n-k) f^(k)(z)
    and normalizes numerically, since f fixes the norm of the ground state.
    """
    if n < 0:
        raise ConfigError("Landau level index must be non-negative")
    z = grid.z(params)
    zc = np.conj(z)
    acc = np.zeros(grid.shape, dtype=complex)
    for k in range(n + 1):
        fk = f(z, k)
        if not np.any(fk):
            continue
        acc += comb(n, k) * (-2.0 * zc) ** (n - k) * fk
    sign = (-1.0) ** n / np.sqrt(2.0**n * factorial(n))
    field = GridField(sign * np.exp(-zc * z).real * acc, grid).normalized()
    if check:
        field.check_boundary(f"psi_{n}")
    return field


def _dz_factor(params):
    return np.sqrt(params.hbar / (params.mass * params.omega_B))


def _wirtinger(values, grid, params, conjugate):
    """d/dz (conjugate=False) or d/dz* (conjugate=True), spectrally."""
    eps = params.epsilon
    kx = grid.kx[:, None].copy()
    ky = grid.ky[None, :].copy()
    # the Nyquist mode has no well-defined odd derivative
    if grid.nx % 2 == 0:
        kx[grid.nx // 2] = 0.0
    if grid.ny % 2 == 0:
        ky[:, grid.ny // 2] = 0.0
    # d/dz = (d_x - i eps d_y) l ;  d/dz* = (d_x + i eps d_y) l
    sym = 1j * kx - eps * ky if conjugate else 1j * kx + eps * ky
    w = max_workers()
    spec = scipy.fft.fft2(values, workers=w)
    return scipy.fft.ifft2(spec * (sym * _dz_factor(params)), workers=w)


LADDERS = ("a", "a_dag", "b", "b_dag")


def apply_ladder_grid(which, field, params, check=True):
    """Apply a, a^dag, b or b^dag as a differential operator."""
    grid = field.grid
    z = grid.z(params)
    psi = field.values
    s = 1.0 / np.sqrt(2.0)
    if which == "a":
        out = s * (z * psi + _wirtinger(psi, grid, params, True))
    elif which == "a_dag":
        out = s * (np.conj(z) * psi - _wirtinger(psi, grid, params, False))
    elif which == "b":
        out = s * (np.conj(z) * psi + _wirtinger(psi, grid, params, False))
    elif which == "b_dag":
        out = s * (z * psi - _wirtinger(psi, grid, params, True))
    else:
        raise ConfigError(f"unknown ladder operator {which!r}; expected one of {LADDERS}")
    result = GridField(out, grid)
    if check and result.norm_sq() > 0:
        result.check_boundary(f"{which} applied")
    return result


def ladder_mean(which, field, params):
    """<psi| op |psi> for a ladder operator, normalized by <psi|psi>."""
    return field.inner(apply_ladder_grid(which, field, params, check=False)) / field.norm_sq()


def displacement_shift(alpha, params):
    """Translation (dx, dy) of the packet produced by D(alpha)."""
    s = params.orbit_scale
    return s * alpha.real, params.epsilon * s * alpha.imag


def shift_field(values, grid, sx, sy):
    """psi(x - sx, y - sy) by the Fourier shift theorem."""
    w = max_workers()
    phase = np.exp(-1j * (grid.kx[:, None] * sx + grid.ky[None, :] * sy))
    return scipy.fft.ifft2(scipy.fft.fft2(values, workers=w) * phase, workers=w)


def displace_wavefunction(field, alpha, params, check=True):
    """Wave function of D(alpha)|psi>: a rigid translation times a plane wave."""
    alpha = complex(alpha)
    if alpha == 0:
        return GridField(field.values.copy(), field.grid)
    grid = field.grid
    sx, sy = displacement_shift(alpha, params)
    X, Y = grid.mesh
    k = np.sqrt(params.mass * params.omega_B / (2.0 * params.hbar))
    plane = np.exp(1j * k * (alpha.imag * X - params.epsilon * alpha.real * Y))
    out = GridField(plane * shift_field(field.values, grid, sx, sy), grid)
    if check:
        out.check_boundary("displaced field")
    return out


def ground_state(grid, params, f=None):
    return number_wavefunction(0, f or HolomorphicPoly(), grid, params, check=False)


def band_limit_cutoff(trunc, params):
    """Wavenumber above which no |n n'> inside the truncation has weight."""
    levels = trunc.n_max_a + trunc.n_max_b
    return 1.5 * (np.sqrt(levels + 1.0) + 3.0) / params.length_scale


def _band_limit(values, grid, k_cut):
    k = np.hypot(grid.kx[:, None], grid.ky[None, :])
    w = max_workers()
    spec = scipy.fft.fft2(values, workers=w) * np.exp(-((k / k_cut) ** 16))
    return scipy.fft.ifft2(spec, workers=w)


def fock_basis_on_grid(grid, params, trunc, method="ladder"):
    """Orthonormal |n n'> functions on the grid, shape (n_max_a+1, n_max_b+1, nx, ny).

    ``method='ladder'`` starts from the f=1 ground state and applies
    |0 n'> = b^dag |0 n'-1> / sqrt(n') and |n n'> = a^dag |n-1 n'> / sqrt(n)
    with spectral derivatives.  Each raising step amplifies grid-scale
    noise by roughly k_max * l, so the result is band-limited to the
    truncation's wavenumber range after every step.  ``method='closed'``
    evaluates the Leibniz closed form with f(z) = z^n' instead.

    Either way every new function is Gram-Schmidt corrected against the
    earlier ones of the same angular momentum n' - n (other sectors are
    orthogonal by rotational symmetry) and normalized, which fixes phases
    to the ladder convention: positive overlap with the raw construction.
    """
    if method not in ("ladder", "closed"):
        raise ConfigError(f"unknown basis method {method!r}")
    basis = np.empty(trunc.shape + grid.shape, dtype=complex)
    sectors = {}
    k_cut = band_limit_cutoff(trunc, params)

    def admit(n, m, values):
        for prev in sectors.get(m - n, ()):
            values = values - _kernels.vdot(prev, values) * grid.cell_area * prev
        values = values / np.sqrt(_kernels.sum_abs2(values) * grid.cell_area)
        values = np.ascontiguousarray(values)
        basis[n, m] = values
        sectors.setdefault(m - n, []).append(values)

    if method == "closed":
        for m in range(trunc.n_max_b + 1):
            f = HolomorphicPoly((0.0,) * m + (1.0,))
            for n in range(trunc.n_max_a + 1):
                admit(n, m, number_wavefunction(n, f, grid, params, check=False).values)
        return basis

    def raise_(op, values, k):
        out = apply_ladder_grid(op, GridField(values, grid), params, check=False).values
        return _band_limit(out / np.sqrt(k), grid, k_cut)

    admit(0, 0, ground_state(grid, params).values)
    for m in range(1, trunc.n_max_b + 1):
        admit(0, m, raise_("b_dag", basis[0, m - 1], m))
    for m in range(trunc.n_max_b + 1):
        for n in range(1, trunc.n_max_a + 1):
            admit(n, m, raise_("a_dag", basis[n - 1, m], n))
    return basis


@dataclass(frozen=True, eq=False)
class FockProjection:
    state: TwoModeState
    raw_amps: np.ndarray
    captured_norm: float


def project_to_fock(field, params, trunc, basis=None, min_capture=CAPTURE_MIN, method="ladder"):
    """Expand a grid field in the |n n'> basis; fails if too little norm is captured."""
    if basis is None:
        basis = fock_basis_on_grid(field.grid, params, trunc, method)
    psi = field.normalized()
    flat = basis.reshape(trunc.dimension, -1)
    amps = (flat.conj() @ psi.values.ravel()) * field.grid.cell_area
    captured = float(np.sum(np.abs(amps) ** 2))
    if captured < min_capture:
        raise TruncationError(
            f"Fock projection captured norm {captured:.6f} < {min_capture}; "
            "raise the truncation or enlarge the grid"
        )
    raw = amps.reshape(trunc.shape)
    state = TwoModeState(raw, trunc).normalized()
    return FockProjection(state, raw, captured)


def synthesize_state(state, grid, params, basis=None, method="closed", min_amplitude=1e-14):
    """Real-space wave function of a two-mode state.

    With ``method='closed'`` and no precomputed basis the |n n'> functions
    are generated one at a time and only for amplitudes above
    ``min_amplitude``, so large truncations stay cheap.
    """
    if basis is None and method == "closed":
        values = np.zeros(grid.shape, dtype=complex)
        for (n, m), c in np.ndenumerate(state.amps):
            if abs(c) <= min_amplitude:
                continue
            f = HolomorphicPoly((0.0,) * m + (1.0,))
            values += c * number_wavefunction(n, f, grid, params, check=False).values
        return GridField(values, grid)
    if basis is None:
        basis = fock_basis_on_grid(grid, params, state.trunc, method)
    flat = basis.reshape(state.trunc.dimension, -1)
    values = (state.vector @ flat).reshape(grid.shape)
    return GridField(values, grid)
