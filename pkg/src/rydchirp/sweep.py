"""2D parameter sweeps over (chirp rate, peak Rabi frequency).

Each cell is one full propagation from the all-ground state.  Cells are
independent work items: a worker pool may execute them in any order, and the
aggregated result is identical whatever the worker count, so sweep CSV
output is byte-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from multiprocessing import Pool

import numpy as np

from .analysis import resonance_time
from .errors import ProtocolError, RydchirpError
from .model import PulseSpec, SystemSpec, enumerate_basis
from .observe import (
    ghz_fidelity,
    population_difference,
    single_g_indices,
    w_fidelity,
    w_population_sum,
)
from .propagate import IntegratorConfig, evolve, ground_state

PROTOCOLS = ("GHZ", "W")


@dataclass(frozen=True)
class SweepGrid:
    """Axes and base parameters of a sweep.

    ``alpha_range``/``omega_range`` are (min, max, steps) with steps >= 2;
    both chirp rates and both peak Rabi frequencies are set equal per cell.
    Protocol GHZ recomputes the chirp turn-off at the ground/all-Rydberg
    crossing for every cell; protocol W keeps the chirp on throughout.
    """

    system: SystemSpec
    pulse: PulseSpec
    alpha_range: tuple[float, float, int]
    omega_range: tuple[float, float, int]
    protocol: str
    convention: str = "direct"

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}")
        for name, rng in (("alpha_range", self.alpha_range), ("omega_range", self.omega_range)):
            lo, hi, steps = rng
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"{name} must be finite")
            if int(steps) < 2:
                raise ValueError(f"{name} needs at least 2 steps")

    @property
    def alphas(self) -> np.ndarray:
        lo, hi, steps = self.alpha_range
        return np.linspace(lo, hi, int(steps))

    @property
    def omegas(self) -> np.ndarray:
        lo, hi, steps = self.omega_range
        return np.linspace(lo, hi, int(steps))

    def cell_pulse(self, alpha: float, omega: float) -> PulseSpec:
        pulse = replace(self.pulse, omega01=omega, omega02=omega,
                        alpha1=alpha, alpha2=alpha, chirp_off_time=None)
        if self.protocol == "GHZ" and alpha != 0.0:
            t_res = resonance_time(self.system, pulse)
            pulse = replace(pulse, chirp_off_time=t_res)
        return pulse


@dataclass(frozen=True)
class SweepResult:
    """Per-cell observables on the sweep grid (NaN marks failed cells)."""

    alphas: np.ndarray
    omegas: np.ndarray
    protocol: str
    convention: str
    fidelity: np.ndarray
    pop_metric: np.ndarray
    norm: np.ndarray
    single_g_pops: np.ndarray | None
    failures: tuple[dict, ...]
    metadata: dict

    @property
    def pop_metric_name(self) -> str:
        return "pop_diff" if self.protocol == "GHZ" else "pop_sum"

    def to_csv(self, path, metadata: dict | None = None) -> None:
        """Long-format ``alpha,omega,fidelity,pop_diff_or_sum,norm`` rows."""
        with open(path, "w", encoding="utf-8") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            fh.write("alpha,omega,fidelity,pop_diff_or_sum,norm\n")
            for i, alpha in enumerate(self.alphas):
                for j, omega in enumerate(self.omegas):
                    fh.write(f"{alpha:.9g},{omega:.9g},{self.fidelity[i, j]:.9g},"
                             f"{self.pop_metric[i, j]:.9g},{self.norm[i, j]:.9g}\n")

    def sidecar(self) -> dict:
        return {
            "protocol": self.protocol,
            "convention": self.convention,
            "alpha_range": [float(self.alphas[0]), float(self.alphas[-1]), len(self.alphas)],
            "omega_range": [float(self.omegas[0]), float(self.omegas[-1]), len(self.omegas)],
            "pop_metric": self.pop_metric_name,
            "n_failures": len(self.failures),
            **self.metadata,
        }


_WORKER_STATE: dict = {}


def _init_worker(grid: SweepGrid, cfg: IntegratorConfig) -> None:
    _WORKER_STATE["grid"] = grid
    _WORKER_STATE["cfg"] = cfg
    _WORKER_STATE["basis"] = enumerate_basis(grid.system.n_atoms)


def _run_cell(cell: tuple[int, int]):
    grid: SweepGrid = _WORKER_STATE["grid"]
    cfg: IntegratorConfig = _WORKER_STATE["cfg"]
    basis = _WORKER_STATE["basis"]
    i, j = cell
    alpha = float(grid.alphas[i])
    omega = float(grid.omegas[j])
    try:
        pulse = grid.cell_pulse(alpha, omega)
        traj = evolve(grid.system, pulse, cfg, ground_state(basis),
                      convention=grid.convention, basis=basis)
        final = traj.final
        n = grid.system.n_atoms
        if grid.protocol == "GHZ":
            fid = ghz_fidelity(final)
            metric = population_difference(final, "g" * n, "r" * n)
        else:
            fid = w_fidelity(final)
            metric = w_population_sum(final)
        norm = float(np.linalg.norm(final.amplitudes))
        gpops = np.abs(final.amplitudes[single_g_indices(n)]) ** 2
        return i, j, fid, metric, norm, gpops, None
    except (RydchirpError, ValueError) as exc:
        return i, j, math.nan, math.nan, math.nan, None, f"{type(exc).__name__}: {exc}"


def run_sweep(grid: SweepGrid, cfg: IntegratorConfig,
              workers: int | None = None) -> SweepResult:
    """Propagate every grid cell and aggregate observables in grid order.

    ``workers`` > 1 distributes cells over a process pool; output is
    independent of the worker count and of completion order.
    """
    na, no = len(grid.alphas), len(grid.omegas)
    cells = [(i, j) for i in range(na) for j in range(no)]
    if workers is not None and workers > 1:
        chunk = max(1, len(cells) // (4 * workers))
        with Pool(workers, initializer=_init_worker, initargs=(grid, cfg)) as pool:
            outcomes = pool.map(_run_cell, cells, chunksize=chunk)
    else:
        _init_worker(grid, cfg)
        outcomes = [_run_cell(c) for c in cells]

    n = grid.system.n_atoms
    fidelity = np.full((na, no), math.nan)
    pop_metric = np.full((na, no), math.nan)
    norm = np.full((na, no), math.nan)
    gpops = np.full((na, no, n), math.nan)
    failures = []
    for i, j, fid, metric, nrm, gp, err in outcomes:
        fidelity[i, j] = fid
        pop_metric[i, j] = metric
        norm[i, j] = nrm
        if gp is not None:
            gpops[i, j] = gp
        if err is not None:
            failures.append({"i": i, "j": j, "alpha": float(grid.alphas[i]),
                             "omega": float(grid.omegas[j]), "error": err})

    window = cfg.resolve_window(grid.pulse)
    return SweepResult(
        alphas=grid.alphas, omegas=grid.omegas, protocol=grid.protocol,
        convention=grid.convention, fidelity=fidelity, pop_metric=pop_metric,
        norm=norm, single_g_pops=gpops if grid.protocol == "W" else None,
        failures=tuple(failures),
        metadata={"dt": cfg.dt, "window": [window[0], window[1]],
                  "samples": cfg.samples},
    )


def _pairwise_spread(result: SweepResult) -> np.ndarray:
    """Max pairwise single-g population difference per cell (NaN-safe)."""
    if result.single_g_pops is None:
        raise ProtocolError("equal-population analysis needs a W-protocol sweep "
                            "with stored single-g populations")
    pops = result.single_g_pops
    return np.nanmax(pops, axis=2) - np.nanmin(pops, axis=2)


def equal_population_mask(result: SweepResult, threshold: float = 0.01) -> np.ndarray:
    """Cells where all single-g populations agree within the threshold."""
    spread = _pairwise_spread(result)
    with np.errstate(invalid="ignore"):
        return spread <= threshold


def equal_population_contour(result: SweepResult,
                             threshold: float = 0.01) -> list[np.ndarray]:
    """Iso-lines of the max pairwise population spread at the threshold level.

    Returns polylines as (k, 2) arrays of (alpha, omega) coordinates.  Failed
    (NaN) cells are treated as far above threshold so contours skirt them; a
    sweep whose spread never reaches the threshold yields no polylines (the
    whole equal-population region is then given by
    :func:`equal_population_mask`).
    """
    from skimage.measure import find_contours

    spread = _pairwise_spread(result)
    spread = np.where(np.isnan(spread), 1e6, spread)
    lines = find_contours(spread, level=threshold)
    polylines = []
    for line in lines:
        alpha = np.interp(line[:, 0], np.arange(len(result.alphas)), result.alphas)
        omega = np.interp(line[:, 1], np.arange(len(result.omegas)), result.omegas)
        polylines.append(np.column_stack([alpha, omega]))
    return polylines
