"""Analytic layer: bare-energy spectra, level crossings, and the effective
two-level reduction of the ground/all-Rydberg passage.

Everything here works on quoted (MHz, us) values; only ``evolve_effective``
applies the angular convention, exactly as the full propagator does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import rk4_propagate
from .errors import NoCrossingError, SingularityError
from .model import (
    BasisState,
    CollectiveBasis,
    PulseSpec,
    SystemSpec,
    angular_scale,
    bare_energy,
    energy_slope,
    enumerate_basis,
    interaction_shift,
)
from .propagate import IntegratorConfig, Trajectory, _sample_steps, _step_grid


@dataclass(frozen=True)
class DegeneracyClass:
    """States sharing one bare-energy expression at all times."""

    representative: BasisState
    members: tuple[str, ...]

    @property
    def degeneracy(self) -> int:
        return len(self.members)

    @property
    def column(self) -> str:
        return "E_" + "_".join(self.members)


def degeneracy_classes(system: SystemSpec, pulse: PulseSpec,
                       basis: CollectiveBasis | None = None) -> list[DegeneracyClass]:
    """Group the collective states by (n_e, n_r, interaction shift).

    Two states are degenerate at every time exactly when those three numbers
    coincide, since the bare energy is n_e*omega2(t) + n_r*omega3(t) + shift.
    """
    if basis is None:
        basis = enumerate_basis(system.n_atoms)
    groups: dict[tuple, list[BasisState]] = {}
    for s in basis.states:
        key = (s.n_excited, s.n_rydberg, round(interaction_shift(s, system.v), 9))
        groups.setdefault(key, []).append(s)
    classes = [DegeneracyClass(representative=members[0],
                               members=tuple(m.label for m in members))
               for members in groups.values()]
    classes.sort(key=lambda c: c.members[0])
    # put the all-ground class first for readable output
    classes.sort(key=lambda c: c.representative.label != "g" * system.n_atoms)
    return classes


@dataclass(frozen=True)
class SpectrumTrace:
    """Bare energies of one representative per degeneracy class over time."""

    times: np.ndarray
    energies: np.ndarray
    classes: tuple[DegeneracyClass, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "energies", np.asarray(self.energies, dtype=float))
        object.__setattr__(self, "classes", tuple(self.classes))
        if self.energies.shape != (len(self.classes), self.times.shape[0]):
            raise ValueError("energies must be (n_classes, n_times)")

    def to_csv(self, path, metadata: dict | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            fh.write("t," + ",".join(c.column for c in self.classes) + "\n")
            for i, t in enumerate(self.times):
                row = ",".join(f"{self.energies[j, i]:.9g}" for j in range(len(self.classes)))
                fh.write(f"{t:.9g},{row}\n")

    def sidecar(self) -> list[dict]:
        return [{"column": c.column, "representative": c.representative.label,
                 "members": list(c.members), "degeneracy": c.degeneracy}
                for c in self.classes]


def spectrum_trace(system: SystemSpec, pulse: PulseSpec, times) -> SpectrumTrace:
    """Evaluate each unique bare-energy line over the time grid (chirp-off aware)."""
    times = np.asarray(times, dtype=float)
    classes = degeneracy_classes(system, pulse)
    energies = np.empty((len(classes), times.shape[0]))
    for j, cls in enumerate(classes):
        energies[j] = bare_energy(cls.representative, system, pulse, times)
    return SpectrumTrace(times=times, energies=energies, classes=classes)


def resonance_time(system: SystemSpec, pulse: PulseSpec) -> float:
    """Time at which the all-Rydberg level crosses the all-ground level.

    Solves N*omega3(t) + 2*sum_{i<j} v[i][j] = 0 on the linear (chirp-on)
    branch: t_c + (N*delta2 + 2*sum V) / (N*(alpha1 + alpha2)).
    """
    total_alpha = pulse.alpha1 + pulse.alpha2
    if total_alpha == 0.0:
        raise NoCrossingError(
            "alpha1 + alpha2 = 0: the all-Rydberg level never sweeps, no crossing")
    n = system.n_atoms
    return pulse.t_center + (n * system.delta2 + 2.0 * system.v_sum) / (n * total_alpha)


def crossing_times(system: SystemSpec, pulse: PulseSpec, state: BasisState,
                   window: tuple[float, float] | None = None) -> list[float]:
    """All times in the window where the state's bare energy crosses zero.

    The energy is piecewise linear in the chirp clock: solved on the chirp-on
    branch, on the optional turn-off ramp, and never on the frozen tail (a
    level parked exactly at zero is resonant, not crossing).  Returns an
    ordered, deduplicated list; empty when the level never reaches zero.
    """
    if window is None:
        window = (pulse.t_center - 3.0 * pulse.tau0, pulse.t_center + 3.0 * pulse.tau0)
    t0, t1 = window
    slope = energy_slope(state, pulse)
    e_center = float(bare_energy(state, system, pulse, pulse.t_center))
    if slope == 0.0:
        return []
    clock_star = -e_center / slope  # chirp-clock value at which E = 0
    tc = pulse.t_center
    T = pulse.chirp_off_time
    ramp = pulse.chirp_ramp

    hits: list[float] = []
    lin_end = t1 if T is None else min(T, t1)
    t_star = tc + clock_star
    if t0 <= t_star <= lin_end:
        hits.append(t_star)
    if T is not None and ramp > 0.0 and T < t1:
        # on the ramp the clock advances as (T - tc) + u - u^2/(2 ramp)
        q = clock_star - (T - tc)
        disc = ramp * ramp - 2.0 * ramp * q
        if q > 0.0 and disc >= 0.0:
            u = ramp - math.sqrt(disc)
            t_ramp = T + u
            if 0.0 < u <= ramp and t_ramp <= t1:
                hits.append(t_ramp)
    out: list[float] = []
    for t in sorted(hits):
        if not out or abs(t - out[-1]) > 1e-12:
            out.append(t)
    return out


@dataclass(frozen=True)
class EffectiveTwoLevel:
    """Two-level reduction of the all-g <-> all-r passage for a 3-atom chain.

    The coupling is the six-photon effective Rabi frequency
    c * Omega0(t)^6 / (Delta^2 V^3) with V the nearest-neighbor interaction;
    the scaling carries an unknown O(1) prefactor c (default 1) that can be
    calibrated against the full simulation.
    """

    system: SystemSpec
    pulse: PulseSpec
    prefactor: float = 1.0

    def __post_init__(self):
        if self.prefactor <= 0.0:
            raise ValueError("prefactor must be positive")
        if self.system.n_atoms != 3:
            raise ValueError("the effective two-level reduction is for 3-atom chains")
        if not math.isclose(self.pulse.omega01, self.pulse.omega02, rel_tol=1e-9):
            raise ValueError("effective model assumes equal peak Rabi frequencies")
        if abs(self.system.delta1) == 0.0:
            raise SingularityError("one-photon detuning must be nonzero")
        if self.nearest_neighbor_v <= 0.0:
            raise SingularityError("need a positive nearest-neighbor interaction")

    @property
    def nearest_neighbor_v(self) -> float:
        return float(np.max(self.system.v))

    @property
    def peak_effective_rabi(self) -> float:
        return (self.prefactor * self.pulse.omega01**6
                / (self.system.delta1**2 * self.nearest_neighbor_v**3))

    def detuning_slope(self) -> float:
        """Slope of the all-r diagonal term: 6*alpha for equal chirps."""
        return 3.0 * (self.pulse.alpha1 + self.pulse.alpha2)


def effective_rabi(model: EffectiveTwoLevel, t) -> float | np.ndarray:
    """c * Omega0(t)^6 / (Delta^2 V^3), sixth power of the common envelope."""
    return model.peak_effective_rabi * model.pulse.envelope(t) ** 6


def evolve_effective(model: EffectiveTwoLevel, cfg: IntegratorConfig,
                     convention: str = "direct") -> Trajectory:
    """Integrate the reduced system i da/dt = H_eff a with
    H_eff = [[0, -W(t)], [-W(t), -6 alpha clock(t)]], W = effective Rabi.

    The sixth power of the Gaussian envelope is itself a Gaussian of width
    tau0/sqrt(6), so the full RK4 kernel is reused with a narrowed envelope.
    Returns a two-component trajectory labeled by the all-g and all-r states.
    """
    scale = angular_scale(convention)
    pulse = model.pulse
    window = cfg.resolve_window(pulse)
    nsteps, dt = _step_grid(window, cfg.dt)
    steps = _sample_steps(nsteps, cfg.samples)

    base = np.zeros(2)
    slope = np.array([0.0, -model.detuning_slope() * scale])
    w0 = model.peak_effective_rabi * scale
    data = np.array([-w0, -w0])
    indices = np.array([1, 0], dtype=np.int32)
    indptr = np.array([0, 1, 2], dtype=np.int32)
    psi0 = np.array([1.0 + 0.0j, 0.0 + 0.0j])
    chirp_off = math.inf if pulse.chirp_off_time is None else pulse.chirp_off_time

    amps = rk4_propagate(psi0, base, slope, data, indices, indptr,
                         window[0], dt, nsteps, pulse.t_center,
                         pulse.tau0 / math.sqrt(6.0), chirp_off,
                         pulse.chirp_ramp, steps)
    n = model.system.n_atoms
    return Trajectory(times=window[0] + steps * dt, amplitudes=amps,
                      labels=("g" * n, "r" * n))


@dataclass(frozen=True)
class DressedAngles:
    """Mixing angle of the effective two-level dressed states over time.

    cos^2 + sin^2 = 1 holds identically; ``undefined`` flags samples where
    both the coupling and the chirp term vanish and the angle is meaningless.
    """

    times: np.ndarray
    cos_theta: np.ndarray
    sin_theta: np.ndarray
    undefined: np.ndarray


def dressed_angles(model: EffectiveTwoLevel, times) -> DressedAngles:
    """Evaluate the dressed-state mixing angle along the passage.

    cos Theta = sqrt(1/2 + x / (2 sqrt(W^2 + x^2))) with x = 3*alpha*clock(t)
    and W the effective Rabi frequency; the chirp clock freezes after the
    turn-off, which for a turn-off at exact resonance (x = 0) parks the angle
    at 45 degrees and preserves the created superposition.
    """
    times = np.asarray(times, dtype=float)
    clock = model.pulse.chirp_clock(times)
    x = 0.5 * model.detuning_slope() * clock  # 3*alpha*(t - tc) for equal chirps
    w = effective_rabi(model, times)
    hyp = np.hypot(w, x)
    undefined = hyp == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(undefined, np.nan, np.clip(x / (2.0 * hyp), -0.5, 0.5))
    cos_theta = np.sqrt(0.5 + ratio)
    sin_theta = np.sqrt(0.5 - ratio)
    return DressedAngles(times=times, cos_theta=cos_theta, sin_theta=sin_theta,
                         undefined=undefined)


@dataclass(frozen=True)
class EffectiveCalibration:
    """Result of fitting the effective-model prefactor to a full run."""

    prefactor: float
    max_deviation: float
    trajectory: Trajectory


def calibrate_effective_prefactor(system: SystemSpec, pulse: PulseSpec,
                                  full: Trajectory, cfg: IntegratorConfig,
                                  convention: str = "direct",
                                  bounds: tuple[float, float] = (0.01, 50.0),
                                  ) -> EffectiveCalibration:
    """Least-squares fit of the prefactor c against the full ground population.

    Minimizes sum_t (P_g^eff(t; c) - P_g^full(t))^2 over the trajectory
    samples and returns the fitted c together with the worst-case pointwise
    deviation of the fitted effective model.
    """
    from scipy.optimize import minimize_scalar

    label = "g" * system.n_atoms
    p_full = full.population_of(label)

    def run(c: float) -> Trajectory:
        model = EffectiveTwoLevel(system=system, pulse=pulse, prefactor=c)
        return evolve_effective(model, cfg, convention=convention)

    def loss(c: float) -> float:
        p_eff = run(c).population_of(label)
        return float(np.sum((p_eff - p_full) ** 2))

    res = minimize_scalar(loss, bounds=bounds, method="bounded",
                          options={"xatol": 1e-3})
    best = run(float(res.x))
    dev = float(np.max(np.abs(best.population_of(label) - p_full)))
    return EffectiveCalibration(prefactor=float(res.x), max_deviation=dev,
                                trajectory=best)
