"""Initial-state families: number states, superpositions, displaced states."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._util import complex_to_pair, pair_to_complex
from .errors import ConfigError, NumericalError, TruncationError
from .fock import TwoModeState, _lowering

KINDS = ("number", "superposition", "displaced_number", "coherent", "random")
UNITARITY_TOL = 1e-8


def adequacy_requirement(n, alpha):
    """Smallest mode cutoff that holds D(alpha)|n> without visible leakage."""
    r = abs(alpha)
    return n + r * r + 6.0 * r + 10.0


def check_adequacy(n, alpha, n_max, mode="a"):
    need = adequacy_requirement(n, alpha)
    if need > n_max:
        raise TruncationError(
            f"mode {mode}: displacing |{n}> by {complex(alpha):.4g} needs n_max >= {need:.2f}, "
            f"truncation has {n_max}"
        )


def safe_levels(alpha, n_max, depth=1):
    """Highest level m that survives ``depth`` chained displacements by alpha.

    Identities such as D^dag a D = a + alpha apply two displacements in a
    row, each needing its own margin, so they are checked with depth=2.
    """
    return int(np.floor(n_max - depth * adequacy_requirement(0, alpha)))


@dataclass(frozen=True, eq=False)
class DisplacementMatrix:
    entries: np.ndarray
    alpha: complex

    @property
    def size(self):
        return self.entries.shape[0]

    def unitarity_defect(self, n_safe=None):
        k = self.size if n_safe is None else n_safe + 1
        d = self.entries[:, :k]
        return float(np.abs(d.conj().T @ d - np.eye(k)).max())


def _generator(alpha, n_max):
    a = _lowering(n_max)
    return alpha * a.conj().T - np.conj(alpha) * a


def displacement_matrix(alpha, trunc, method="expm", mode="a", check=True):
    """exp(alpha a^dag - alpha* a) on one mode's truncated basis.

    ``method='expm'`` uses scaling and squaring with Pade approximants;
    ``method='eig'`` diagonalises the Hermitian matrix i*G instead.  Both
    give a unitary matrix because the truncated generator stays
    anti-Hermitian; the truncation error shows up as leakage near the top
    level, which the adequacy check guards against.
    """
    alpha = complex(alpha)
    n_max = trunc.n_max_a if mode == "a" else trunc.n_max_b
    if check:
        check_adequacy(0, alpha, n_max, mode)
    gen = _generator(alpha, n_max)
    if method == "expm":
        d = scipy.linalg.expm(gen)
    elif method == "eig":
        w, v = np.linalg.eigh(1j * gen)
        d = (v * np.exp(-1j * w)) @ v.conj().T
    else:
        raise ConfigError(f"unknown matrix exponential method {method!r}")
    return DisplacementMatrix(d, alpha)


@dataclass(frozen=True)
class StateSpec:
    kind: str
    n: int = 0
    n_prime: int = 0
    alpha: complex = 0j
    terms: tuple = ()
    seed: int = 0
    n_max: int | None = None
    b_shift: complex = 0j

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown state kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "b_shift", complex(self.b_shift))
        if self.n < 0 or self.n_prime < 0:
            raise ConfigError("quantum numbers must be non-negative")
        if self.kind == "superposition":
            terms = tuple((int(n), int(m), complex(w)) for n, m, w in self.terms)
            if not terms:
                raise ConfigError("superposition needs at least one term")
            if all(w == 0 for _, _, w in terms):
                raise ConfigError("superposition weights are all zero")
            if any(n < 0 or m < 0 for n, m, _ in terms):
                raise ConfigError("quantum numbers must be non-negative")
            object.__setattr__(self, "terms", terms)

    @classmethod
    def number(cls, n, n_prime=0):
        return cls("number", n=n, n_prime=n_prime)

    @classmethod
    def superposition(cls, terms):
        return cls("superposition", terms=tuple(terms))

    @classmethod
    def displaced_number(cls, n, alpha, b_shift=0j):
        return cls("displaced_number", n=n, alpha=alpha, b_shift=b_shift)

    @classmethod
    def coherent(cls, alpha, b_shift=0j):
        return cls("coherent", alpha=alpha, b_shift=b_shift)

    @classmethod
    def random(cls, seed, n_max=None):
        return cls("random", seed=seed, n_max=n_max)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "number":
            d.update(n=self.n, n_prime=self.n_prime)
        elif self.kind == "superposition":
            d["terms"] = [[n, m, complex_to_pair(w)] for n, m, w in self.terms]
        elif self.kind == "displaced_number":
            d.update(n=self.n, alpha=complex_to_pair(self.alpha))
        elif self.kind == "coherent":
            d["alpha"] = complex_to_pair(self.alpha)
        else:
            d.update(seed=self.seed, n_max=self.n_max)
        if self.b_shift != 0:
            d["b_shift"] = complex_to_pair(self.b_shift)
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError("state spec must be an object with a 'kind' field")
        kind = d["kind"]
        known = {"kind", "n", "n_prime", "alpha", "terms", "seed", "n_max", "b_shift"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown state spec fields: {sorted(extra)}")
        try:
            terms = tuple(
                (int(t[0]), int(t[1]), pair_to_complex(t[2])) for t in d.get("terms", ())
            )
            return cls(
                kind=kind,
                n=int(d.get("n", 0)),
                n_prime=int(d.get("n_prime", 0)),
                alpha=pair_to_complex(d.get("alpha", 0.0)),
                terms=terms,
                seed=int(d.get("seed", 0)),
                n_max=None if d.get("n_max") is None else int(d["n_max"]),
                b_shift=pair_to_complex(d.get("b_shift", 0.0)),
            )
        except (TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed state spec: {exc}") from exc


def _basis_amps(trunc, entries):
    amps = np.zeros(trunc.shape, dtype=complex)
    for n, m, w in entries:
        if n > trunc.n_max_a or m > trunc.n_max_b:
            raise TruncationError(f"|{n},{m}> lies outside truncation {trunc.shape}")
        amps[n, m] += w
    return amps


def make_state(spec, params, trunc):
    """Build the normalized two-mode state described by ``spec``."""
    if spec.kind == "number":
        amps = _basis_amps(trunc, [(spec.n, spec.n_prime, 1.0)])
    elif spec.kind == "superposition":
        amps = _basis_amps(trunc, spec.terms)
        if not np.any(amps):
            raise ConfigError("superposition weights cancel to the zero state")
    elif spec.kind in ("displaced_number", "coherent"):
        n = spec.n if spec.kind == "displaced_number" else 0
        check_adequacy(n, spec.alpha, trunc.n_max_a)
        d = displacement_matrix(spec.alpha, trunc, check=False)
        amps = np.zeros(trunc.shape, dtype=complex)
        amps[:, 0] = d.entries[:, n]
    else:
        rng = np.random.default_rng(spec.seed)
        top = trunc.n_max_a if spec.n_max is None else min(spec.n_max, trunc.n_max_a)
        amps = np.zeros(trunc.shape, dtype=complex)
        sub = (top + 1, trunc.n_max_b + 1)
        amps[: top + 1, :] = rng.standard_normal(sub) + 1j * rng.standard_normal(sub)
    if spec.b_shift != 0:
        occupied = np.nonzero(np.any(amps != 0, axis=0))[0]
        check_adequacy(int(occupied.max()), spec.b_shift, trunc.n_max_b, mode="b")
        db = displacement_matrix(spec.b_shift, trunc, mode="b", check=False)
        amps = amps @ db.entries.T
    return TwoModeState(amps, trunc).normalized()


def ladder_means(state):
    """(<a>, <b>, <a^dag a>) straight from the amplitude grid."""
    c = state.amps
    n = np.arange(c.shape[0])[:, None]
    m = np.arange(c.shape[1])[None, :]
    mean_a = complex(np.sum(np.conj(c[:-1, :]) * np.sqrt(n[1:]) * c[1:, :]))
    mean_b = complex(np.sum(np.conj(c[:, :-1]) * np.sqrt(m[:, 1:]) * c[:, 1:]))
    mean_n = float(np.sum(n * np.abs(c) ** 2))
    return mean_a, mean_b, mean_n


def mean_and_variance_a(state, tol=1e-12):
    mean_a, _, mean_n = ladder_means(state)
    var = mean_n - abs(mean_a) ** 2
    if var < 0:
        if var < -tol:
            raise NumericalError(f"(Delta a)^2 = {var:.3e} is negative beyond roundoff")
        var = 0.0
    return {"mean_a": mean_a, "delta_a_sq": var}
