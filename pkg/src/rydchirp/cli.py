"""Command-line front end: spectrum, evolve, sweep, and validate.

Exit codes: 0 success, 1 config error, 2 numerical failure.
"""
from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import analysis, observe
from .config import RunConfig, load_config, parse_config
from .errors import ConfigError, NoCrossingError, RydchirpError
from .model import build_hamiltonian, enumerate_basis
from .propagate import IntegratorConfig, StateVector, evolve, ground_state, oracle_evolve
from .sweep import SweepGrid, equal_population_contour, run_sweep
from .svgmap import render_heatmap


def _load(config_path: str, out: str | None, convention: str | None,
          dt: float | None) -> RunConfig:
    payload = json.loads(Path(config_path).read_text(encoding="utf-8"))
    if convention is not None:
        payload["angular_convention"] = convention
    if dt is not None:
        payload.setdefault("integrator", {})["dt"] = dt
    cfg = parse_config(payload, default_stem=Path(config_path).stem)
    if out is not None:
        cfg = replace(cfg, output_dir=out)
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    return cfg


def _meta(cfg: RunConfig) -> dict:
    return {"config_hash": cfg.config_hash, "convention": cfg.convention}


def _auto_chirp_off(cfg: RunConfig):
    """GHZ protocol: freeze the chirp at the ground/all-Rydberg crossing."""
    pulse = cfg.pulse
    if cfg.protocol == "GHZ" and pulse.chirp_off_time is None \
            and pulse.alpha1 + pulse.alpha2 != 0.0:
        pulse = replace(pulse, chirp_off_time=analysis.resonance_time(cfg.system, pulse))
    return pulse


_shared_options = [
    click.option("--config", "config_path", required=True,
                 type=click.Path(exists=True, dir_okay=False),
                 help="JSON run configuration."),
    click.option("--out", default=None, type=click.Path(file_okay=False),
                 help="Output directory (overrides the config)."),
    click.option("--convention", default=None,
                 type=click.Choice(["direct", "two_pi"]),
                 help="Angular-frequency convention override."),
    click.option("--dt", default=None, type=float, help="Integrator step override (us)."),
]


def shared_options(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Chirped two-photon control of Rydberg chains: GHZ/W preparation tools."""


@main.command()
@shared_options
def spectrum(config_path, out, convention, dt):
    """Bare-energy spectrum over time plus a zero-crossing report."""
    try:
        cfg = _load(config_path, out, convention, dt)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    try:
        pulse = _auto_chirp_off(cfg)
        window = cfg.integrator.resolve_window(pulse)
        times = np.linspace(window[0], window[1], cfg.spectrum_samples)
        trace = analysis.spectrum_trace(cfg.system, pulse, times)
        stem = Path(cfg.output_dir) / cfg.output_stem
        trace.to_csv(f"{stem}_spectrum.csv", metadata=_meta(cfg))

        report = []
        for cls in trace.classes:
            try:
                hits = analysis.crossing_times(cfg.system, pulse, cls.representative,
                                               window=window)
            except NoCrossingError:
                hits = []
            for t in hits:
                report.append({"state": cls.representative.label,
                               "time": t, "degeneracy": cls.degeneracy})
        payload = {"metadata": _meta(cfg), "crossings": report,
                   "classes": trace.sidecar()}
        Path(f"{stem}_crossings.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        click.echo(f"wrote {stem}_spectrum.csv ({len(trace.classes)} energy classes) "
                   f"and {stem}_crossings.json ({len(report)} crossings)")
    except RydchirpError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(2)


@main.command(name="evolve")
@shared_options
def evolve_cmd(config_path, out, convention, dt):
    """Propagate the full system and write a population/fidelity trajectory."""
    try:
        cfg = _load(config_path, out, convention, dt)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    try:
        pulse = _auto_chirp_off(cfg)
        basis = enumerate_basis(cfg.system.n_atoms)
        traj = evolve(cfg.system, pulse, cfg.integrator, ground_state(basis),
                      convention=cfg.convention, basis=basis)

        extra = {}
        kind = cfg.protocol or ("GHZ" if "ghz_fidelity" in cfg.observables else None)
        states = [StateVector(traj.amplitudes[i], float(traj.times[i]))
                  for i in range(len(traj.times))]
        if kind == "GHZ" or "ghz_fidelity" in cfg.observables:
            extra["F_ghz"] = [observe.ghz_fidelity(s) for s in states]
        if kind == "W" or "w_fidelity" in cfg.observables:
            extra["F_w"] = [observe.w_fidelity(s) for s in states]
        if "population_difference" in cfg.observables or kind == "GHZ":
            n = cfg.system.n_atoms
            extra["pop_diff"] = [observe.population_difference(s, "g" * n, "r" * n)
                                 for s in states]
        if "w_population_sum" in cfg.observables or kind == "W":
            extra["pop_sum"] = [observe.w_population_sum(s) for s in states]

        meta = _meta(cfg)
        if kind == "GHZ" and cfg.system.n_atoms == 3 \
                and pulse.omega01 == pulse.omega02 and pulse.omega01 != 0.0:
            cal = analysis.calibrate_effective_prefactor(
                cfg.system, pulse, traj, cfg.integrator, convention=cfg.convention)
            n = cfg.system.n_atoms
            extra["eff_P_" + "g" * n] = cal.trajectory.population_of("g" * n)
            extra["eff_P_" + "r" * n] = cal.trajectory.population_of("r" * n)
            meta["effective_prefactor"] = f"{cal.prefactor:.6g}"

        stem = Path(cfg.output_dir) / cfg.output_stem
        traj.to_csv(f"{stem}_trajectory.csv", extra_columns=extra, metadata=meta)
        final = traj.final
        summary = ", ".join(f"{name}={vals[-1]:.6g}" for name, vals in extra.items())
        click.echo(f"wrote {stem}_trajectory.csv; final norm "
                   f"{float(np.linalg.norm(final.amplitudes)):.9f}; {summary}")
    except RydchirpError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(2)


@main.command(name="sweep")
@shared_options
@click.option("--workers", default=1, type=int, show_default=True,
              help="Worker processes for sweep cells.")
@click.option("--svg", is_flag=True, help="Also render SVG heat maps.")
def sweep_cmd(config_path, out, convention, dt, workers, svg):
    """Run a 2D (chirp rate, peak Rabi) sweep and write CSV (+ optional SVG)."""
    try:
        cfg = _load(config_path, out, convention, dt)
        if cfg.sweep is None:
            raise ConfigError("config has no 'sweep' section")
        if cfg.protocol not in ("GHZ", "W"):
            raise ConfigError("sweep needs protocol GHZ or W")
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    try:
        grid = SweepGrid(
            system=cfg.system, pulse=cfg.pulse,
            alpha_range=tuple(cfg.sweep["alpha_range"]),
            omega_range=tuple(cfg.sweep["omega_range"]),
            protocol=cfg.protocol, convention=cfg.convention)
        result = run_sweep(grid, cfg.integrator, workers=workers)

        stem = Path(cfg.output_dir) / cfg.output_stem
        result.to_csv(f"{stem}_sweep.csv", metadata=_meta(cfg))
        sidecar = {"metadata": _meta(cfg), **result.sidecar()}
        Path(f"{stem}_sweep_meta.json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if result.failures:
            Path(f"{stem}_failures.json").write_text(
                json.dumps({"metadata": _meta(cfg), "failures": list(result.failures)},
                           indent=2, sort_keys=True) + "\n", encoding="utf-8")

        if svg:
            contours = None
            if cfg.protocol == "W":
                threshold = (cfg.sweep or {}).get("contour_threshold", 0.01)
                contours = equal_population_contour(result, threshold=threshold)
            fid_label = "GHZ fidelity" if cfg.protocol == "GHZ" else "W fidelity"
            render_heatmap(
                f"{stem}_fidelity.svg", result.alphas, result.omegas, result.fidelity,
                title=f"{fid_label} ({cfg.output_stem})",
                x_label="chirp rate (MHz/us)", y_label="peak Rabi frequency (MHz)",
                value_label="fidelity", vmin=0.0, vmax=1.0, contours=contours,
                metadata=_meta(cfg))
            metric_name = result.pop_metric_name
            vmin, vmax = (-1.0, 1.0) if cfg.protocol == "GHZ" else (0.0, 1.0)
            render_heatmap(
                f"{stem}_{metric_name}.svg", result.alphas, result.omegas,
                result.pop_metric,
                title=f"{'population difference' if cfg.protocol == 'GHZ' else 'single-g population sum'} ({cfg.output_stem})",
                x_label="chirp rate (MHz/us)", y_label="peak Rabi frequency (MHz)",
                value_label=metric_name, vmin=vmin, vmax=vmax, contours=contours,
                metadata=_meta(cfg))

        ok = result.fidelity[np.isfinite(result.fidelity)]
        if ok.size == 0:
            click.echo("all sweep cells failed; see the failure manifest", err=True)
            sys.exit(2)
        click.echo(f"wrote {stem}_sweep.csv: {ok.size}/{result.fidelity.size} cells, "
                   f"max fidelity {float(np.max(ok)):.6g}, "
                   f"{len(result.failures)} failures")
    except RydchirpError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(2)


@main.command()
@shared_options
def validate(config_path, out, convention, dt):
    """Run the invariant suite on the configured system and print pass/fail."""
    try:
        cfg = _load(config_path, out, convention, dt)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc

    pulse = _auto_chirp_off(cfg)
    checks: list[tuple[str, bool, str]] = []

    window = cfg.integrator.resolve_window(pulse)
    herm = 0.0
    for t in np.linspace(window[0], window[1], 7):
        h = build_hamiltonian(cfg.system, pulse, t, convention=cfg.convention).matrix
        herm = max(herm, float(np.max(np.abs(h - h.conj().T))))
    checks.append(("hermiticity", herm <= 1e-12, f"max |H - H^dag| = {herm:.2e}"))

    classes = analysis.degeneracy_classes(cfg.system, pulse)
    rng = np.random.default_rng(7)
    sample_ts = rng.uniform(window[0], window[1], size=3)
    seen = {tuple(np.round([analysis.bare_energy(s, cfg.system, pulse, t)
                            for t in sample_ts], 9))
            for s in enumerate_basis(cfg.system.n_atoms).states}
    checks.append(("unique-energy-classes", len(seen) == len(classes),
                   f"{len(classes)} classes (sampled {len(seen)})"))

    try:
        basis = enumerate_basis(cfg.system.n_atoms)
        traj = evolve(cfg.system, pulse, cfg.integrator, ground_state(basis),
                      convention=cfg.convention, basis=basis)
        drift = float(np.max(np.abs(np.linalg.norm(traj.amplitudes, axis=1) - 1.0)))
        checks.append(("norm-conservation", drift <= 1e-6, f"max drift {drift:.2e}"))
        oracle = oracle_evolve(cfg.system, pulse, cfg.integrator, ground_state(basis),
                               convention=cfg.convention, basis=basis)
        dist = float(np.linalg.norm(traj.amplitudes[-1] - oracle.amplitudes[-1]))
        checks.append(("oracle-equivalence", dist <= 1e-5, f"final distance {dist:.2e}"))
    except RydchirpError as exc:
        checks.append(("norm-conservation", False, str(exc)))

    if cfg.system.n_atoms == 3 and pulse.omega01 == pulse.omega02 and pulse.omega01 != 0:
        model2 = analysis.EffectiveTwoLevel(system=cfg.system, pulse=pulse)
        angles = analysis.dressed_angles(model2, np.linspace(window[0], window[1], 501))
        valid = ~angles.undefined
        dev = float(np.max(np.abs(angles.cos_theta[valid] ** 2
                                  + angles.sin_theta[valid] ** 2 - 1.0)))
        checks.append(("dressed-angle-identity", dev <= 1e-12, f"max |cos^2+sin^2-1| = {dev:.2e}"))

    failed = 0
    for name, ok, detail in checks:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failed += 1
    if failed:
        click.echo(f"{failed} of {len(checks)} checks failed", err=True)
        sys.exit(2)
    click.echo(f"all {len(checks)} checks passed")


if __name__ == "__main__":
    main()
