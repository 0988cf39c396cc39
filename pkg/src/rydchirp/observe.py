"""Target-state fidelities and population observables.

The GHZ target is (|g...g> + |r...r>)/sqrt(2).  The W target is the equal
in-phase superposition of the N states with exactly one atom in g and the
rest in r.  Both fidelities are squared overlaps |<target|psi>|^2, so they
are invariant under a global phase of the state but sensitive to relative
phases between the contributing amplitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EntanglementUndefinedError
from .model import BasisState
from .propagate import StateVector

_DIGIT = {"g": 0, "e": 1, "r": 2}


def _n_atoms_from_dim(dim: int) -> int:
    n = round(math.log(dim, 3))
    if 3**n != dim:
        raise ValueError(f"state dimension {dim} is not a power of 3")
    return n


def state_index(label_or_state, n_atoms: int) -> int:
    """Index of a product state under the fixed ordering (g<e<r, atom 1 first)."""
    levels = label_or_state.levels if isinstance(label_or_state, BasisState) else tuple(label_or_state)
    if len(levels) != n_atoms:
        raise ValueError(f"state {''.join(levels)!r} has {len(levels)} atoms, expected {n_atoms}")
    idx = 0
    for lvl in levels:
        idx = 3 * idx + _DIGIT[lvl]
    return idx


def single_g_indices(n_atoms: int) -> list[int]:
    """Indices of the N states with one atom in g and the rest in r."""
    out = []
    for pos in range(n_atoms):
        levels = tuple("g" if i == pos else "r" for i in range(n_atoms))
        out.append(state_index(levels, n_atoms))
    return out


def _require_entangleable(n_atoms: int, what: str) -> None:
    if n_atoms < 2:
        raise EntanglementUndefinedError(
            f"{what} is undefined for a single atom; need at least 2")


@dataclass(frozen=True)
class TargetState:
    """Reference state against which fidelities are evaluated."""

    kind: str
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"target state norm {norm} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def ghz(cls, n_atoms: int) -> "TargetState":
        _require_entangleable(n_atoms, "the GHZ target")
        amps = np.zeros(3**n_atoms, dtype=complex)
        amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
        return cls(kind="GHZ", amplitudes=amps)

    @classmethod
    def w(cls, n_atoms: int) -> "TargetState":
        _require_entangleable(n_atoms, "the W target")
        amps = np.zeros(3**n_atoms, dtype=complex)
        for idx in single_g_indices(n_atoms):
            amps[idx] = 1.0 / math.sqrt(n_atoms)
        return cls(kind="W", amplitudes=amps)

    @classmethod
    def custom(cls, amplitudes) -> "TargetState":
        return cls(kind="custom", amplitudes=np.asarray(amplitudes, dtype=complex))

    def fidelity(self, state: StateVector) -> float:
        """Direct squared overlap |<target|psi>|^2."""
        return float(abs(np.vdot(self.amplitudes, state.amplitudes)) ** 2)


def ghz_fidelity(state: StateVector) -> float:
    """(1/2)(|a_g..g|^2 + |a_r..r|^2 + 2 Re(a_g..g conj(a_r..r)))."""
    n = _n_atoms_from_dim(state.dim)
    _require_entangleable(n, "the GHZ fidelity")
    a_g = state.amplitudes[0]
    a_r = state.amplitudes[-1]
    return float(0.5 * (abs(a_g) ** 2 + abs(a_r) ** 2 + 2.0 * (a_g * np.conj(a_r)).real))


def w_fidelity(state: StateVector, half_prefactor: bool = False) -> float:
    """Squared overlap with the W target, prefactor 1/N.

    ``half_prefactor=True`` switches to a historical 1/2 prefactor variant;
    note that a perfect N=3 W state then scores 1.5, so the default 1/N is
    the normalized fidelity.
    """
    n = _n_atoms_from_dim(state.dim)
    _require_entangleable(n, "the W fidelity")
    amps = state.amplitudes[single_g_indices(n)]
    total = abs(np.sum(amps)) ** 2
    prefactor = 0.5 if half_prefactor else 1.0 / n
    return float(prefactor * total)


def population(state: StateVector, which) -> float:
    """|a_which|^2 for a product state given as BasisState or label string."""
    n = _n_atoms_from_dim(state.dim)
    return float(abs(state.amplitudes[state_index(which, n)]) ** 2)


def population_difference(state: StateVector, a, b) -> float:
    """P_a - P_b."""
    return population(state, a) - population(state, b)


def w_population_sum(state: StateVector) -> float:
    """Total population of the N single-g states."""
    n = _n_atoms_from_dim(state.dim)
    _require_entangleable(n, "the single-g population sum")
    return float(np.sum(np.abs(state.amplitudes[single_g_indices(n)]) ** 2))
