"""Time integration of the collective Schrodinger equation i da/dt = H(t) a.

Two propagators are provided.  ``evolve`` is the production path: classical
fixed-step RK4 driven by a compiled kernel when available.  ``oracle_evolve``
is an independent cross-check that advances the state with the exact
matrix exponential of the midpoint Hamiltonian via Hermitian
eigendecomposition; it is slower but unitary per step up to rounding, and is
deliberately kept free of the RK4 code path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import rk4_propagate
from .errors import IntegrationDivergedError, ToleranceError
from .model import (
    CollectiveBasis,
    PulseSpec,
    SystemSpec,
    _terms_chirp_clock,
    enumerate_basis,
    hamiltonian_terms,
)

#: Accepted trajectories keep their norm within this of 1 at every sample.
NORM_TOL = 1e-6
#: Beyond this drift the integrator refuses to return a trajectory at all.
DIVERGENCE_TOL = 1e-4


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration window and sampling cadence.

    ``window=None`` means 3 Gaussian widths either side of the pulse center
    (so the default span is 6*tau0 with the pulse centered).  ``samples``
    output rows are taken at a uniform cadence regardless of dt.
    """

    dt: float = 1e-4
    window: tuple[float, float] | None = None
    convergence_halvings: int = 6
    samples: int = 1000

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.window is not None and not self.window[0] < self.window[1]:
            raise ValueError("window must satisfy t_start < t_end")
        if self.samples < 2:
            raise ValueError("need at least 2 samples")
        if self.convergence_halvings < 1:
            raise ValueError("convergence_halvings must be >= 1")

    def resolve_window(self, pulse: PulseSpec) -> tuple[float, float]:
        if self.window is not None:
            return self.window
        return (pulse.t_center - 3.0 * pulse.tau0, pulse.t_center + 3.0 * pulse.tau0)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the collective basis at one instant."""

    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def ground_state(basis: CollectiveBasis, time: float = 0.0) -> StateVector:
    """|g...g> (index 0 in the fixed ordering)."""
    amps = np.zeros(basis.dim, dtype=complex)
    amps[0] = 1.0
    return StateVector(amplitudes=amps, time=time)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled amplitudes along one propagation."""

    times: np.ndarray
    amplitudes: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (times.shape[0], len(self.labels)):
            raise ValueError("amplitude array shape does not match times/labels")
        norms = np.linalg.norm(amps, axis=1)
        drift = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
        if drift > NORM_TOL:
            raise IntegrationDivergedError(
                f"norm drifted by {drift:.3e} (> {NORM_TOL}) along the trajectory; "
                "reduce dt")
        times.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def final(self) -> StateVector:
        return StateVector(amplitudes=self.amplitudes[-1], time=float(self.times[-1]))

    def population_of(self, label: str) -> np.ndarray:
        return self.populations[:, self.labels.index(label)]

    def to_csv(self, path, selected: list[str] | None = None,
               extra_columns: dict | None = None,
               metadata: dict | None = None) -> None:
        """Write ``t,<label>,...`` population columns with 9 significant digits.

        ``extra_columns`` maps column name -> array aligned with times (used
        for fidelity or overlay columns); ``metadata`` becomes leading
        ``# key=value`` comment lines.
        """
        labels = list(self.labels) if selected is None else list(selected)
        cols = [self.population_of(lbl) for lbl in labels]
        names = list(labels)
        for name, values in (extra_columns or {}).items():
            names.append(name)
            cols.append(np.asarray(values, dtype=float))
        with open(path, "w", encoding="utf-8") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            fh.write("t," + ",".join(names) + "\n")
            for i, t in enumerate(self.times):
                row = ",".join(f"{col[i]:.9g}" for col in cols)
                fh.write(f"{t:.9g},{row}\n")


def _sample_steps(nsteps: int, samples: int) -> np.ndarray:
    steps = np.unique(np.round(np.linspace(0, nsteps, samples)).astype(np.int64))
    return steps


def _step_grid(window: tuple[float, float], dt: float) -> tuple[int, float]:
    t0, t1 = window
    nsteps = max(1, int(round((t1 - t0) / dt)))
    return nsteps, (t1 - t0) / nsteps


def _check_drift(amps: np.ndarray, dt: float) -> None:
    drift = float(np.max(np.abs(np.linalg.norm(amps, axis=1) - 1.0)))
    if drift > DIVERGENCE_TOL:
        raise IntegrationDivergedError(
            f"propagation lost norm by {drift:.3e} (> {DIVERGENCE_TOL}) at dt={dt}; "
            "use a smaller step")


def evolve(system: SystemSpec, pulse: PulseSpec, cfg: IntegratorConfig,
           initial: StateVector, convention: str = "direct",
           basis: CollectiveBasis | None = None) -> Trajectory:
    """Fixed-step RK4 propagation of the full collective state."""
    if basis is None:
        basis = enumerate_basis(system.n_atoms)
    if initial.dim != basis.dim:
        raise ValueError(f"initial state has dim {initial.dim}, basis needs {basis.dim}")
    window = cfg.resolve_window(pulse)
    _check_chirp_off(pulse, window)
    terms = hamiltonian_terms(system, pulse, basis=basis, convention=convention)
    nsteps, dt = _step_grid(window, cfg.dt)
    steps = _sample_steps(nsteps, cfg.samples)
    amps = rk4_propagate(
        np.ascontiguousarray(initial.amplitudes, dtype=np.complex128),
        terms.base, terms.slope, terms.data, terms.indices, terms.indptr,
        window[0], dt, nsteps, terms.t_center, terms.tau0,
        terms.chirp_off_time, terms.chirp_ramp, steps)
    _check_drift(amps, dt)
    return Trajectory(times=window[0] + steps * dt, amplitudes=amps, labels=basis.labels)


def oracle_evolve(system: SystemSpec, pulse: PulseSpec, cfg: IntegratorConfig,
                  initial: StateVector, convention: str = "direct",
                  basis: CollectiveBasis | None = None) -> Trajectory:
    """Piecewise-exponential propagation via midpoint eigendecomposition.

    Exactly norm-preserving per step up to machine rounding; used to validate
    the RK4 path, never replaced by it.
    """
    if basis is None:
        basis = enumerate_basis(system.n_atoms)
    if initial.dim != basis.dim:
        raise ValueError(f"initial state has dim {initial.dim}, basis needs {basis.dim}")
    window = cfg.resolve_window(pulse)
    _check_chirp_off(pulse, window)
    terms = hamiltonian_terms(system, pulse, basis=basis, convention=convention)
    coupling = terms.dense_coupling()
    nsteps, dt = _step_grid(window, cfg.dt)
    steps = _sample_steps(nsteps, cfg.samples)

    diag_idx = np.diag_indices(basis.dim)
    tc, tau0 = terms.t_center, terms.tau0
    out = np.empty((len(steps), basis.dim), dtype=np.complex128)
    pos = 0
    y = initial.amplitudes.astype(np.complex128, copy=True)
    if steps[pos] == 0:
        out[pos] = y
        pos += 1
    for step in range(nsteps):
        tm = window[0] + (step + 0.5) * dt
        env = math.exp(-((tm - tc) ** 2) / (2.0 * tau0**2))
        h = env * coupling.astype(complex)
        h[diag_idx] += terms.base + terms.slope * _terms_chirp_clock(terms, tm)
        w, u = np.linalg.eigh(h)
        y = u @ (np.exp(-1j * w * dt) * (u.conj().T @ y))
        while pos < len(steps) and steps[pos] == step + 1:
            out[pos] = y
            pos += 1
    return Trajectory(times=window[0] + steps * dt, amplitudes=out, labels=basis.labels)


def _check_chirp_off(pulse: PulseSpec, window: tuple[float, float]) -> None:
    T = pulse.chirp_off_time
    if T is not None and not (window[0] <= T <= window[1]):
        raise ValueError(
            f"chirp_off_time {T} lies outside the simulation window {window}")


def converge(system: SystemSpec, pulse: PulseSpec, cfg: IntegratorConfig,
             initial: StateVector, observable=None, convention: str = "direct",
             tol: float = 1e-6):
    """Halve dt until ``observable(final state)`` moves by less than ``tol``.

    Returns ``(trajectory, achieved_dt)`` for the first refinement level whose
    observable agrees with the previous one.  The default observable is the
    squared overlap with the equal ground/Rydberg superposition (the GHZ
    fidelity); pass any ``StateVector -> float`` callable for other targets.
    """
    if observable is None:
        from .observe import ghz_fidelity

        observable = ghz_fidelity
    previous = None
    dt = cfg.dt
    history = []
    for _ in range(cfg.convergence_halvings + 1):
        run_cfg = IntegratorConfig(dt=dt, window=cfg.window,
                                   convergence_halvings=cfg.convergence_halvings,
                                   samples=cfg.samples)
        try:
            traj = evolve(system, pulse, run_cfg, initial, convention=convention)
            value = float(observable(traj.final))
        except IntegrationDivergedError:
            traj, value = None, None
        history.append((dt, value))
        if value is not None and previous is not None and abs(value - previous[0]) < tol:
            return traj, dt
        previous = (value, traj) if value is not None else None
        dt /= 2.0
    raise ToleranceError(
        f"observable did not settle within {tol} after {cfg.convergence_halvings} "
        f"halvings; history (dt, value): {history}")
