"""Truncated two-mode Fock space for a charged particle in a uniform field.

The two modes are the Landau-level mode ``a`` (energy) and the
guiding-center mode ``b`` (degeneracy).  States are stored as a 2D
amplitude grid ``amps[n, n']``; operators act on the row-major flattening
of that grid, so the flat index of ``|n n'>`` is ``n * (n_max_b + 1) + n'``.

Natural units are used throughout: hbar = M = c = 1.  The cyclotron
frequency is kept explicit so that length and time scales stay visible.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, DimensionError, NumericalError

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class PhysicalParams:
    epsilon: int = 1
    omega_B: float = 1.0
    # hbar*c/|q| in the caller's flux units; only used for report conversion
    flux_unit: float = 1.0
    hbar: float = field(default=1.0, init=False)
    mass: float = field(default=1.0, init=False)
    c_light: float = field(default=1.0, init=False)

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ConfigError(f"epsilon must be +1 or -1, got {self.epsilon!r}")
        if not self.omega_B > 0:
            raise ConfigError(f"omega_B must be positive, got {self.omega_B!r}")
        if not self.flux_unit > 0:
            raise ConfigError(f"flux_unit must be positive, got {self.flux_unit!r}")

    @property
    def period(self):
        return 2.0 * np.pi / self.omega_B

    @property
    def length_scale(self):
        """sqrt(hbar / M omega_B), the magnetic length up to a factor."""
        return float(np.sqrt(self.hbar / (self.mass * self.omega_B)))

    @property
    def orbit_scale(self):
        """sqrt(2 hbar / M omega_B): converts <a>, <b> into lengths."""
        return float(np.sqrt(2.0 * self.hbar / (self.mass * self.omega_B)))


@dataclass(frozen=True)
class FockTruncation:
    n_max_a: int
    n_max_b: int = 0

    def __post_init__(self):
        if int(self.n_max_a) != self.n_max_a or self.n_max_a < 1:
            raise ConfigError(f"n_max_a must be an integer >= 1, got {self.n_max_a!r}")
        if int(self.n_max_b) != self.n_max_b or self.n_max_b < 0:
            raise ConfigError(f"n_max_b must be an integer >= 0, got {self.n_max_b!r}")

    @property
    def shape(self):
        return (self.n_max_a + 1, self.n_max_b + 1)

    @property
    def dimension(self):
        return (self.n_max_a + 1) * (self.n_max_b + 1)

    def index(self, n, n_prime=0):
        if not (0 <= n <= self.n_max_a and 0 <= n_prime <= self.n_max_b):
            raise DimensionError(f"|{n},{n_prime}> lies outside truncation {self.shape}")
        return n * (self.n_max_b + 1) + n_prime

    @cached_property
    def levels(self):
        """Flat arrays (n, n') of the quantum numbers of every basis vector."""
        n, n_prime = np.meshgrid(
            np.arange(self.n_max_a + 1), np.arange(self.n_max_b + 1), indexing="ij"
        )
        return n.ravel(), n_prime.ravel()

    def safe_mask(self, margin_a=1, margin_b=1):
        """Basis vectors at least ``margin`` levels below each mode's top."""
        n, n_prime = self.levels
        return (n <= self.n_max_a - margin_a) & (n_prime <= self.n_max_b - margin_b)


@dataclass(frozen=True, eq=False)
class TwoModeState:
    amps: np.ndarray
    trunc: FockTruncation

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != self.trunc.shape:
            raise DimensionError(
                f"amplitude grid {amps.shape} does not match truncation {self.trunc.shape}"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_vector(cls, vec, trunc):
        return cls(np.asarray(vec, dtype=complex).reshape(trunc.shape), trunc)

    @property
    def vector(self):
        return self.amps.ravel()

    @property
    def norm_sq(self):
        return float(np.sum(np.abs(self.amps) ** 2))

    def normalized(self):
        norm = np.sqrt(self.norm_sq)
        if norm == 0.0:
            raise NumericalError("cannot normalize the zero state")
        return TwoModeState(self.amps / norm, self.trunc)

    def is_normalized(self, tol=1e-12):
        return abs(self.norm_sq - 1.0) <= tol

    def overlap(self, other):
        """<self|other>."""
        if self.trunc != other.trunc:
            raise DimensionError("states live on different truncations")
        return complex(np.vdot(self.vector, other.vector))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    label: str
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator {self.label} is not square: {m.shape}")
        if self.hermitian:
            m = 0.5 * (m + m.conj().T)
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def dimension(self):
        return self.entries.shape[0]

    @property
    def dagger(self):
        return OperatorMatrix(self.entries.conj().T, self.label + "^dag", self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.entries @ other.entries, f"{self.label}*{other.label}")
        if isinstance(other, TwoModeState):
            if other.trunc.dimension != self.dimension:
                raise DimensionError("operator and state dimensions differ")
            return TwoModeState.from_vector(self.entries @ other.vector, other.trunc)
        return NotImplemented

    def restrict(self, mask):
        """Block of the matrix on the basis vectors selected by ``mask``."""
        return self.entries[np.ix_(mask, mask)]


def commutator(A, B):
    return OperatorMatrix(A.entries @ B.entries - B.entries @ A.entries, f"[{A.label},{B.label}]")


def _lowering(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


def build_ladder(mode, trunc):
    """Lowering operator of mode ``'a'`` or ``'b'``; identity on the other mode."""
    if mode == "a":
        m = np.kron(_lowering(trunc.n_max_a), np.eye(trunc.n_max_b + 1))
    elif mode == "b":
        m = np.kron(np.eye(trunc.n_max_a + 1), _lowering(trunc.n_max_b))
    else:
        raise ConfigError(f"unknown mode {mode!r}; expected 'a' or 'b'")
    return OperatorMatrix(m, mode)


def build_number(mode, trunc):
    n, n_prime = trunc.levels
    diag = n if mode == "a" else n_prime
    label = "N" if mode == "a" else "N'"
    return OperatorMatrix(np.diag(diag.astype(complex)), label, hermitian=True)


def build_hamiltonian(params, trunc):
    n, _ = trunc.levels
    energies = params.hbar * params.omega_B * (n + 0.5)
    return OperatorMatrix(np.diag(energies.astype(complex)), "H", hermitian=True)


def build_angular_momentum(params, trunc):
    n, n_prime = trunc.levels
    lz = params.epsilon * params.hbar * (n_prime - n)
    return OperatorMatrix(np.diag(lz.astype(complex)), "L_z", hermitian=True)


def _herm(half):
    return half + half.conj().T


def build_position_momentum(params, trunc):
    """x, y, p_x, p_y reconstructed from the two ladder modes.

    a1 = (a + b)/sqrt2 and a2 = -i eps (a - b)/sqrt2 invert the mode
    rotation; x = l (a1 + a1^dag) and p_x = (hbar/l)(a1 - a1^dag)/2i with
    l = sqrt(hbar / M omega_B), likewise for y and p_y.  Each is assembled
    as S + S^dag so it is Hermitian to the last bit.
    """
    a = build_ladder("a", trunc).entries
    b = build_ladder("b", trunc).entries
    eps = params.epsilon
    ell = params.length_scale
    a1 = (a + b) / np.sqrt(2.0)
    a2 = -1j * eps * (a - b) / np.sqrt(2.0)
    p_scale = params.hbar / ell
    return {
        "x": OperatorMatrix(_herm(ell * a1), "x", hermitian=True),
        "y": OperatorMatrix(_herm(ell * a2), "y", hermitian=True),
        "p_x": OperatorMatrix(_herm(p_scale * a1 / 2j), "p_x", hermitian=True),
        "p_y": OperatorMatrix(_herm(p_scale * a2 / 2j), "p_y", hermitian=True),
    }


def symmetric_gauge_hamiltonian(params, trunc):
    """Kinetic + harmonic + Zeeman-like coupling, built from x, y, p_x, p_y.

    Exact only away from the truncation edge; compare on
    ``trunc.safe_mask(2, 2)``.
    """
    ops = build_position_momentum(params, trunc)
    x, y = ops["x"].entries, ops["y"].entries
    px, py = ops["p_x"].entries, ops["p_y"].entries
    M, w = params.mass, params.omega_B
    lz = x @ py - y @ px
    h = (px @ px + py @ py) / (2 * M) + M * w**2 * (x @ x + y @ y) / 8 - 0.5 * params.epsilon * w * lz
    return OperatorMatrix(h, "H_gauge", hermitian=True)


def canonical_angular_momentum(params, trunc):
    ops = build_position_momentum(params, trunc)
    lz = ops["x"].entries @ ops["p_y"].entries - ops["y"].entries @ ops["p_x"].entries
    return OperatorMatrix(lz, "x p_y - y p_x", hermitian=True)


def expectation(op, state):
    """<psi|op|psi>; a float for Hermitian operators, complex otherwise."""
    if op.dimension != state.trunc.dimension:
        raise DimensionError(
            f"operator {op.label} has dimension {op.dimension}, state has {state.trunc.dimension}"
        )
    v = state.vector
    value = complex(np.vdot(v, op.entries @ v))
    if not op.hermitian:
        return value
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > HERMITIAN_TOL * scale:
        raise NumericalError(
            f"<{op.label}> has imaginary residual {value.imag:.3e} for a Hermitian operator"
        )
    return value.real
