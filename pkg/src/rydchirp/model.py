"""Physical system, chirped pulses, and the collective-basis Hamiltonian.

Each atom is a three-level ladder g-e-r driven by two pulses: pulse 1 couples
g-e with peak Rabi frequency ``omega01``, pulse 2 couples e-r with
``omega02``.  Both share a Gaussian envelope centered at ``t_center`` and may
be linearly chirped; in the field-interaction frame the chirps show up as
time-dependent diagonal shifts of the e and r levels.  Atoms in r interact
pairwise with strengths ``v[i][j]``.

Unit conventions: frequencies and interaction strengths are quoted in MHz,
times in microseconds, chirp rates in MHz/us.  Whether a quoted value enters
the Hamiltonian as-is (numerically equal angular frequency in rad/us) or
multiplied by 2*pi is controlled by the ``convention`` argument of
:func:`build_hamiltonian` / :func:`hamiltonian_terms`; everything else in
this module works on quoted values.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BasisSizeError, GeometryError

LEVELS = ("g", "e", "r")
_LEVEL_INDEX = {"g": 0, "e": 1, "r": 2}

#: Largest chain the dense 3^N machinery will accept.
BASIS_CAP = 8

CONVENTIONS = ("direct", "two_pi")


def angular_scale(convention: str) -> float:
    """Factor applied to quoted frequencies when assembling the Hamiltonian."""
    if convention == "direct":
        return 1.0
    if convention == "two_pi":
        return 2.0 * math.pi
    raise ValueError(f"unknown angular convention {convention!r}; expected one of {CONVENTIONS}")


def _as_interaction_matrix(v, n_atoms: int) -> np.ndarray:
    m = np.array(v, dtype=float)
    if m.shape != (n_atoms, n_atoms):
        raise ValueError(f"interaction matrix must be {n_atoms}x{n_atoms}, got {m.shape}")
    if not np.allclose(m, m.T, atol=0.0):
        raise ValueError("interaction matrix must be symmetric")
    if np.any(np.diag(m) != 0.0):
        raise ValueError("interaction matrix must have zero diagonal")
    if np.any(m < 0.0):
        raise ValueError("interaction strengths must be nonnegative")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class SystemSpec:
    """Chain of three-level atoms with pairwise Rydberg interactions.

    ``delta1`` is the one-photon detuning of the intermediate e level,
    ``delta2`` the two-photon detuning of the r level (both typically
    negative so the collective levels start below the ground level and are
    swept upward by a negative chirp).
    """

    n_atoms: int
    v: np.ndarray
    delta1: float
    delta2: float

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        object.__setattr__(self, "v", _as_interaction_matrix(self.v, self.n_atoms))

    @property
    def v_sum(self) -> float:
        """Sum of pairwise interactions over unordered pairs (V_max for N=3)."""
        return float(np.sum(np.triu(self.v, k=1)))


@dataclass(frozen=True)
class PulseSpec:
    """Two overlapping chirped Gaussian pulses.

    The instantaneous chirp offsets grow linearly as ``alpha_i * (t - t_center)``
    until ``chirp_off_time`` (if set), where they freeze at their current value;
    the turn-off is frequency-continuous.  A nonzero ``chirp_ramp`` smooths the
    freeze by ramping the chirp rate linearly to zero over that duration, which
    lets the offset accrue an extra ``alpha_i * chirp_ramp / 2``.
    """

    omega01: float
    omega02: float
    tau0: float
    t_center: float
    alpha1: float
    alpha2: float
    chirp_off_time: float | None = None
    chirp_ramp: float = 0.0

    def __post_init__(self):
        if self.tau0 <= 0.0:
            raise ValueError("tau0 must be positive")
        if self.chirp_ramp < 0.0:
            raise ValueError("chirp_ramp must be nonnegative")

    def chirp_clock(self, t):
        """Effective ``t - t_center`` seen by the chirp terms at time ``t``.

        Equals ``t - t_center`` while the chirp is on, then freezes (with an
        optional linear rate ramp) after ``chirp_off_time``.
        """
        t = np.asarray(t, dtype=float)
        tc = self.t_center
        if self.chirp_off_time is None:
            out = t - tc
            return float(out) if out.ndim == 0 else out
        T, ramp = self.chirp_off_time, self.chirp_ramp
        frozen = T - tc
        if ramp > 0.0:
            u = np.clip(t - T, 0.0, ramp)
            out = np.where(t <= T, t - tc, frozen + u - u * u / (2.0 * ramp))
        else:
            out = np.where(t <= T, t - tc, frozen)
        return float(out) if out.ndim == 0 else out

    def envelope(self, t):
        """Common Gaussian envelope, 1 at the pulse center."""
        t = np.asarray(t, dtype=float)
        out = np.exp(-((t - self.t_center) ** 2) / (2.0 * self.tau0**2))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LatticeSpec:
    """Equidistant 1D lattice generating power-law pair interactions.

    ``exponent`` 6 gives van-der-Waals scaling, 3 dipole-dipole.  Provide the
    lattice either via ``spacing`` (distance between neighbors) or ``length``
    (end-to-end, divided into ``n_atoms - 1`` equal gaps).
    """

    c_coeff: float
    exponent: int
    n_atoms: int
    spacing: float | None = None
    length: float | None = None

    def __post_init__(self):
        if self.exponent not in (3, 6):
            raise ValueError("exponent must be 3 or 6")
        if self.c_coeff <= 0.0:
            raise ValueError("c_coeff must be positive")
        if (self.spacing is None) == (self.length is None):
            raise ValueError("provide exactly one of spacing or length")
        if self.spacing is not None and self.spacing <= 0.0:
            raise ValueError("spacing must be positive")
        if self.length is not None and self.length <= 0.0:
            raise ValueError("length must be positive")

    @classmethod
    def from_nearest_neighbor(cls, v_nn: float, exponent: int, n_atoms: int,
                              spacing: float = 1.0) -> "LatticeSpec":
        """Lattice whose nearest-neighbor interaction equals ``v_nn``."""
        return cls(c_coeff=v_nn * spacing**exponent, exponent=exponent,
                   n_atoms=n_atoms, spacing=spacing)


@dataclass(frozen=True)
class BasisState:
    """Tensor-product label, one level per atom, e.g. ('g', 'r', 'r')."""

    levels: tuple[str, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise ValueError("levels must be nonempty")
        bad = set(levels) - set(LEVELS)
        if bad:
            raise ValueError(f"unknown level labels {sorted(bad)}; allowed: g, e, r")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_label(cls, label: str) -> "BasisState":
        return cls(tuple(label))

    @property
    def label(self) -> str:
        return "".join(self.levels)

    @property
    def n_atoms(self) -> int:
        return len(self.levels)

    @property
    def n_excited(self) -> int:
        return self.levels.count("e")

    @property
    def n_rydberg(self) -> int:
        return self.levels.count("r")

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class CollectiveBasis:
    """All 3^N product states in a fixed, documented order.

    Ordering is lexicographic with g < e < r and atom 1 most significant, so
    |g...g> is index 0 and |r...r> is index 3^N - 1.
    """

    states: tuple[BasisState, ...]
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s.levels: k for k, s in enumerate(self.states)})

    @property
    def n_atoms(self) -> int:
        return self.states[0].n_atoms

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, state: BasisState | str) -> int:
        levels = tuple(state) if isinstance(state, str) else state.levels
        return self._index[levels]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.states)


def enumerate_basis(n_atoms: int, cap: int = BASIS_CAP) -> CollectiveBasis:
    """All 3^N collective states, atom 1 most significant, g < e < r."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if n_atoms > cap:
        raise BasisSizeError(
            f"n_atoms={n_atoms} gives a 3^{n_atoms}={3**n_atoms}-dimensional basis, "
            f"beyond the cap of {cap} atoms ({3**cap} states)")
    states = tuple(BasisState(levels) for levels in itertools.product(LEVELS, repeat=n_atoms))
    return CollectiveBasis(states)


def lattice_interactions(spec: LatticeSpec) -> np.ndarray:
    """Pairwise interaction matrix v[i][j] = C / (|i-j| * a)^exponent."""
    if spec.n_atoms < 2:
        raise GeometryError("a lattice needs at least 2 atoms to define pair interactions")
    a = spec.spacing if spec.spacing is not None else spec.length / (spec.n_atoms - 1)
    idx = np.arange(spec.n_atoms)
    dist = np.abs(idx[:, None] - idx[None, :]) * a
    with np.errstate(divide="ignore"):
        v = np.where(dist > 0.0, spec.c_coeff / dist**spec.exponent, 0.0)
    v.setflags(write=False)
    return v


def rabi_envelope(pulse: PulseSpec, which: int, t):
    """Instantaneous Rabi frequency of pulse 1 (g-e) or 2 (e-r) at time t."""
    if which == 1:
        peak = pulse.omega01
    elif which == 2:
        peak = pulse.omega02
    else:
        raise ValueError("which must be 1 or 2")
    return peak * pulse.envelope(t)


def effective_detunings(system: SystemSpec, pulse: PulseSpec, t):
    """Instantaneous diagonal shifts (omega2, omega3) of the e and r levels.

    omega2(t) = delta1 - alpha1 * clock(t); omega3(t) = delta2 -
    (alpha1 + alpha2) * clock(t), where the chirp clock freezes after the
    chirp turn-off.
    """
    clock = pulse.chirp_clock(t)
    omega2 = system.delta1 - pulse.alpha1 * clock
    omega3 = system.delta2 - (pulse.alpha1 + pulse.alpha2) * clock
    return omega2, omega3


def interaction_shift(state: BasisState, v) -> float:
    """Collective interaction energy: 2 * sum of v[i][j] over Rydberg pairs.

    The factor 2 reproduces the ordered-pair double sum of the interaction
    term, so the fully excited chain gets 2 * sum_{i<j} v[i][j].
    """
    v = np.asarray(v, dtype=float)
    rydberg = [i for i, lvl in enumerate(state.levels) if lvl == "r"]
    return 2.0 * sum(v[i, j] for i, j in itertools.combinations(rydberg, 2))


def energy_slope(state: BasisState, pulse: PulseSpec) -> float:
    """d(bare energy)/dt while the chirp is on: -(n_e a1 + n_r (a1 + a2))."""
    return -(state.n_excited * pulse.alpha1
             + state.n_rydberg * (pulse.alpha1 + pulse.alpha2))


def bare_energy(state: BasisState, system: SystemSpec, pulse: PulseSpec, t):
    """Diagonal energy of a collective state in the field-interaction frame."""
    omega2, omega3 = effective_detunings(system, pulse, t)
    return (state.n_excited * omega2 + state.n_rydberg * omega3
            + interaction_shift(state, system.v))


@dataclass(frozen=True)
class HamiltonianFrame:
    """Dense collective Hamiltonian evaluated at one instant."""

    matrix: np.ndarray
    time: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if dev > 1e-12:
            raise ValueError(f"Hamiltonian not Hermitian: max |H - H^dag| = {dev:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def _coupling_pairs(basis: CollectiveBasis):
    """Yield (row, col, which_pulse) for single-atom g<->e and e<->r flips."""
    for k, s in enumerate(basis.states):
        for atom, lvl in enumerate(s.levels):
            if lvl == "g":
                target = s.levels[:atom] + ("e",) + s.levels[atom + 1:]
                yield k, basis.index_of(BasisState(target)), 1
            elif lvl == "e":
                down = s.levels[:atom] + ("g",) + s.levels[atom + 1:]
                up = s.levels[:atom] + ("r",) + s.levels[atom + 1:]
                yield k, basis.index_of(BasisState(down)), 1
                yield k, basis.index_of(BasisState(up)), 2
            else:
                target = s.levels[:atom] + ("e",) + s.levels[atom + 1:]
                yield k, basis.index_of(BasisState(target)), 2


@dataclass(frozen=True)
class HamiltonianTerms:
    """Time-separable decomposition H(t) = diag(base + slope*clock(t)) + env(t)*K.

    ``base``/``slope`` hold the diagonal at the pulse center and its chirp
    slope; ``K`` is the peak coupling matrix stored in CSR form (data,
    indices, indptr).  All entries already carry the angular-convention
    scale.  This is what both integrators consume.
    """

    dim: int
    base: np.ndarray
    slope: np.ndarray
    data: np.ndarray
    indices: np.ndarray
    indptr: np.ndarray
    t_center: float
    tau0: float
    chirp_off_time: float
    chirp_ramp: float

    def dense_coupling(self) -> np.ndarray:
        k = np.zeros((self.dim, self.dim))
        for row in range(self.dim):
            for p in range(self.indptr[row], self.indptr[row + 1]):
                k[row, self.indices[p]] = self.data[p]
        return k

    def dense_at(self, t: float) -> np.ndarray:
        """Dense H(t) in scaled units; used by the eigendecomposition oracle."""
        clock = _terms_chirp_clock(self, t)
        env = math.exp(-((t - self.t_center) ** 2) / (2.0 * self.tau0**2))
        h = env * self.dense_coupling().astype(complex)
        h[np.diag_indices(self.dim)] = self.base + self.slope * clock
        return h


def _terms_chirp_clock(terms: HamiltonianTerms, t: float) -> float:
    T, ramp, tc = terms.chirp_off_time, terms.chirp_ramp, terms.t_center
    if t <= T:
        return t - tc
    if ramp > 0.0 and t < T + ramp:
        u = t - T
        return (T - tc) + u - u * u / (2.0 * ramp)
    return (T - tc) + ramp / 2.0


def hamiltonian_terms(system: SystemSpec, pulse: PulseSpec,
                      basis: CollectiveBasis | None = None,
                      convention: str = "direct") -> HamiltonianTerms:
    """Precompute the time-separable pieces of H(t) for the integrators."""
    if basis is None:
        basis = enumerate_basis(system.n_atoms)
    scale = angular_scale(convention)
    dim = basis.dim

    base = np.empty(dim)
    slope = np.empty(dim)
    for k, s in enumerate(basis.states):
        base[k] = (s.n_excited * system.delta1 + s.n_rydberg * system.delta2
                   + interaction_shift(s, system.v))
        slope[k] = energy_slope(s, pulse)

    rows = [[] for _ in range(dim)]
    for k, j, which in _coupling_pairs(basis):
        amp = 0.5 * (pulse.omega01 if which == 1 else pulse.omega02)
        rows[k].append((j, amp))
    indptr = np.zeros(dim + 1, dtype=np.int32)
    indices, data = [], []
    for k in range(dim):
        for j, amp in sorted(rows[k]):
            indices.append(j)
            data.append(amp)
        indptr[k + 1] = len(indices)

    off = math.inf if pulse.chirp_off_time is None else pulse.chirp_off_time
    return HamiltonianTerms(
        dim=dim,
        base=base * scale,
        slope=slope * scale,
        data=np.array(data) * scale,
        indices=np.array(indices, dtype=np.int32),
        indptr=indptr,
        t_center=pulse.t_center,
        tau0=pulse.tau0,
        chirp_off_time=off,
        chirp_ramp=pulse.chirp_ramp,
    )


def build_hamiltonian(system: SystemSpec, pulse: PulseSpec, t: float,
                      basis: CollectiveBasis | None = None,
                      convention: str = "direct") -> HamiltonianFrame:
    """Dense Hermitian H(t): bare energies on the diagonal, envelope-scaled
    half-Rabi couplings between states differing by one atom's g-e or e-r flip."""
    if basis is None:
        basis = enumerate_basis(system.n_atoms)
    scale = angular_scale(convention)
    env1 = rabi_envelope(pulse, 1, t)
    env2 = rabi_envelope(pulse, 2, t)
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    for k, j, which in _coupling_pairs(basis):
        h[k, j] = 0.5 * (env1 if which == 1 else env2) * scale
    for k, s in enumerate(basis.states):
        h[k, k] = bare_energy(s, system, pulse, t) * scale
    return HamiltonianFrame(matrix=h, time=float(t))
