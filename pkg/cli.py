#!/usr/bin/env python3
# cli.py
# Command-line front end: simulate, design, floquet-check, interactions, spectral-density.
import json
import logging
import os
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import typer
from joblib import Parallel, delayed

# ------------------ CONFIG ------------------
try:
    from config import RUNS_ROOT, TOOLKIT_VERSION, LOG_NAME
except Exception:
    RUNS_ROOT, TOOLKIT_VERSION, LOG_NAME = "runs", "0.0.0", "giant_emitter"

import layout
from collective import collective_couplings, eta_extrapolation, export_matrices
from coupling import (CouplingProfile, MomentumCoupling, design_gk, gk_from_profile,
                      inverse_design, kept_mass_fraction, load_momentum_samples,
                      save_profile, truncate)
from dynamics import EmitterSpec, Trajectory, bath_realspace, evolve
from errors import ConfigurationError, ToolkitError, UndefinedFractionError, error_record
from floquet import (DriveSchedule, first_order_bound, first_order_correction,
                     smooth_two_site_schedule, step_schedule)
from lattice import BathSpec
from observables import (density_of_states, directional_mask_population,
                         export_field, golden_rule_rate, miss_fraction, quadrant_fractions,
                         spectral_density, survival_and_rate, survival_series)
from runconfig import (RunConfig, bath_spec, config_document, emitter_spec, load_config,
                       resolve)

log = logging.getLogger(LOG_NAME)

app = typer.Typer(add_completion=False,
                  help="Giant-emitter toolkit: dynamics, designs, Floquet checks, collective couplings.")

FIELD_EXT = {"binary_f64": "bin", "pgm8": "pgm"}


# ------------------ helpers ------------------

def _parse_int_csv(value: str, option_name: str) -> List[int]:
    items = [part.strip() for part in value.split(",") if part.strip() != ""]
    if not items:
        raise ConfigurationError(f"{option_name} must contain at least one integer")
    try:
        return [int(x) for x in items]
    except ValueError as exc:
        raise ConfigurationError(f"{option_name} must be comma-separated integers") from exc


def _run_config(ctx: typer.Context) -> RunConfig:
    opts = ctx.obj
    cfg = load_config(opts["config"])
    if opts["dt"] is not None:
        if not opts["dt"] > 0:
            raise ConfigurationError(f"--dt must be positive (got {opts['dt']})")
        cfg = cfg.model_copy(update={
            "integration": cfg.integration.model_copy(update={"dt": float(opts["dt"])})})
    return resolve(cfg)


def _out_dir(ctx: typer.Context, cfg: Optional[RunConfig], command: str) -> str:
    out = ctx.obj["out"] or (cfg.output_dir if cfg is not None else None) \
        or layout.join(RUNS_ROOT, command)
    ctx.obj["resolved_out"] = out
    layout.ensure_layout(out)
    return out


def _static_gk(emitter: EmitterSpec, spec: BathSpec, workers) -> Optional[MomentumCoupling]:
    c = emitter.effective().coupling
    if c is None:
        return None
    if isinstance(c, CouplingProfile):
        return gk_from_profile(c, spec, workers)
    return c


def _rel(out: str, path: str) -> str:
    return os.path.relpath(path, out).replace(os.sep, "/")


def _guarded(ctx: typer.Context, command: str, body: Callable[[], None]):
    """Run a command; ConfigurationError -> exit 2, other failures -> exit 1."""
    try:
        body()
    except (ToolkitError, OSError) as e:
        code = 2 if isinstance(e, ConfigurationError) else 1
        rec = error_record(e, command)
        typer.echo(json.dumps(rec, sort_keys=True), err=True)
        layout.write_error_record(ctx.obj.get("resolved_out") or ctx.obj.get("out"), rec)
        log.error("%s failed: %s", command, e)
        raise typer.Exit(code=code)


# ------------------ global options ------------------

@app.callback()
def main(ctx: typer.Context,
         config: Optional[str] = typer.Option(None, "--config", help="Run configuration (JSON or YAML)."),
         out: Optional[str] = typer.Option(None, "--out", help="Output directory."),
         threads: Optional[int] = typer.Option(None, "--threads", help="Worker threads (default: all cores)."),
         dt: Optional[float] = typer.Option(None, "--dt", help="Override the integration step.")):
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    ctx.obj = {"config": config, "out": out, "threads": threads, "dt": dt, "resolved_out": None}


def _workers(ctx: typer.Context) -> int:
    t = ctx.obj["threads"]
    return t if t and t > 0 else -1


# ------------------ simulate ------------------

def _write_fields(out: str, cfg: RunConfig, spec: BathSpec, traj: Trajectory, workers) -> List[str]:
    ob = cfg.observables
    paths = []
    for i, st in enumerate(traj.states):
        grid = bath_realspace(st, spec, workers) if ob.field_space == "real" else st.c_k
        meta = {"space": ob.field_space, "N": spec.N, "dimension": spec.dimension,
                "model": spec.model, "snapshot": i}
        for fmt in ob.fields:
            p = layout.join(layout.family_dir(out, layout.F_FIELDS),
                            f"snapshot_{i:03d}.{FIELD_EXT[fmt]}")
            export_field(grid, p, fmt, st.t, meta)
            paths.append(_rel(out, p))
    return paths


def _simulate(ctx: typer.Context):
    cfg = _run_config(ctx)
    out = _out_dir(ctx, cfg, "simulate")
    workers = _workers(ctx)
    spec = bath_spec(cfg)
    emitter = emitter_spec(cfg, spec, workers)
    it, ob = cfg.integration, cfg.observables
    traj = evolve(spec, emitter, it.t_final, it.dt, it.snapshots, it.trace_every,
                  ctx.obj["threads"])

    artifacts: Dict[str, Any] = {"fields": _write_fields(out, cfg, spec, traj, workers)}
    summary: Dict[str, Any] = {"norm_drift": traj.norm_drift,
                               "survival_final": traj.final.emitter_population if len(traj) else None}
    series = layout.family_dir(out, layout.F_SERIES)

    t, p = survival_series(traj)
    norms = traj.trace_norm if len(traj.trace_times) else [s.norm for s in traj.states]
    layout.write_csv(layout.join(series, "survival.csv"), ["t", "survival", "norm"],
                     zip(t, p, norms))
    artifacts["series"] = ["series/survival.csv"]

    if ob.quadrants and spec.dimension == 2:
        rows = []
        for st in traj.states:
            try:
                f = quadrant_fractions(st)
            except UndefinedFractionError as e:
                log.warning("t=%g: %s", st.t, e)
                continue
            miss = miss_fraction(f, ob.target_quadrants) if ob.target_quadrants else float("nan")
            rows.append([st.t, *f.as_tuple(), miss])
        layout.write_csv(layout.join(series, "quadrants.csv"),
                         ["t", "F1", "F2", "F3", "F4", "miss"], rows,
                         {"target_quadrants": ";".join(str(q) for q in ob.target_quadrants)})
        artifacts["series"].append("series/quadrants.csv")
        if rows:
            summary["quadrants_final"] = rows[-1][1:5]
            summary["miss_final"] = rows[-1][5] if ob.target_quadrants else None

    if ob.cone is not None and spec.dimension == 2:
        c = emitter.effective().coupling
        origin = c.centroid() if isinstance(c, CouplingProfile) else np.asarray(cfg.emitter.center, float)
        rows = []
        for st in traj.states:
            try:
                rows.append([st.t, directional_mask_population(
                    st, spec, ob.cone.direction, ob.cone.half_angle, origin, ob.cone.two_sided)])
            except UndefinedFractionError as e:
                log.warning("t=%g: %s", st.t, e)
        layout.write_csv(layout.join(series, "cone.csv"), ["t", "fraction"], rows,
                         {"direction": "%g;%g" % tuple(ob.cone.direction),
                          "half_angle": ob.cone.half_angle})
        artifacts["series"].append("series/cone.csv")
        if rows:
            summary["cone_final"] = rows[-1][1]

    if ob.survival:
        gk = _static_gk(emitter, spec, workers)
        try:
            fit = survival_and_rate(traj, ob.fit_window, spec if gk is not None else None, gk,
                                    emitter.frequency(spec))
            summary.update(gamma_fit=fit.gamma_fit, gamma_golden=fit.gamma_golden,
                           fit_window=list(fit.window), fit_warnings=fit.warnings)
        except ConfigurationError as e:
            log.warning("survival fit skipped: %s", e)

    layout.write_manifest(out, "simulate", config_document(cfg), TOOLKIT_VERSION, artifacts, summary)
    typer.echo(f"simulate: wrote {out}")


@app.command()
def simulate(ctx: typer.Context):
    """Propagate the emitter and write fields, series and the manifest."""
    _guarded(ctx, "simulate", lambda: _simulate(ctx))


# ------------------ design ------------------

def _design(ctx: typer.Context, target: Optional[str], n_tr: str, size: Optional[int],
            g: Optional[float], gk_file: Optional[str]):
    cfg = _run_config(ctx)
    workers = _workers(ctx)
    b = cfg.bath
    spec = BathSpec(b.dimension, size or b.linear_size, b.model, b.hopping, b.band_center)
    sizes = _parse_int_csv(n_tr, "--n-tr")
    if gk_file:
        gk = load_momentum_samples(gk_file, spec)
        name = "user"
    else:
        name = target or cfg.emitter.design
        if name not in ("chiral", "vtype"):
            raise ConfigurationError(f"design target must be chiral or vtype (got '{name}')")
        gk = design_gk(name, g if g is not None else cfg.emitter.g, spec, workers=workers)
    out = _out_dir(ctx, cfg, "design")
    full = inverse_design(gk, spec, workers)

    rows, files = [], []
    for n in sizes:
        kept = truncate(full, n)
        p = layout.join(out, f"profile_ntr{n}.json")
        save_profile(kept, p)
        files.append(_rel(out, p))
        rows.append([n, kept.support, kept_mass_fraction(full, kept)])
    layout.write_csv(layout.join(layout.family_dir(out, layout.F_SERIES), "truncation.csv"),
                     ["n_tr", "support", "kept_mass_fraction"], rows,
                     {"design": name, "N": spec.N})
    summary = {"design": name, "N": spec.N,
               "truncations": [{"n_tr": r[0], "support": r[1], "kept_mass_fraction": r[2]}
                               for r in rows]}
    doc = config_document(cfg)
    doc["design"] = {"target": name, "n_tr": sizes, "linear_size": spec.N, "gk_file": gk_file}
    layout.write_manifest(out, "design", doc, TOOLKIT_VERSION,
                          {"profiles": files, "series": ["series/truncation.csv"]}, summary)
    typer.echo(f"design: wrote {len(files)} profile(s) to {out}")


@app.command()
def design(ctx: typer.Context,
           target: Optional[str] = typer.Option(None, "--target", help="chiral or vtype."),
           n_tr: str = typer.Option("16", "--n-tr", help="Kept sites, comma-separated for a sweep."),
           size: Optional[int] = typer.Option(None, "--N", help="Linear lattice size."),
           g: Optional[float] = typer.Option(None, "--g", help="Peak coupling."),
           gk_file: Optional[str] = typer.Option(None, "--gk-file", help="G(k) samples, JSON [[re, im], ...].")):
    """Inverse-design a target G(k) and truncate it to n_tr sites."""
    _guarded(ctx, "design", lambda: _design(ctx, target, n_tr, size, g, gk_file))


# ------------------ floquet-check ------------------

def _schedule_at(cfg: RunConfig, spec: BathSpec, omega: float) -> DriveSchedule:
    em, sc = cfg.emitter, cfg.emitter.schedule
    center = tuple(em.center)
    if sc is not None and sc.envelope == "step":
        amps = sc.amplitudes if sc.amplitudes is not None else [em.g] * len(sc.positions or [])
        return step_schedule(sc.positions or [], amps, omega, center)
    positions = (sc.positions if sc is not None and sc.positions else
                 [[0] * spec.dimension, [1] * spec.dimension])
    return smooth_two_site_schedule(em.g, omega, positions, center)


def _floquet_check(ctx: typer.Context):
    cfg = _run_config(ctx)
    fl, it = cfg.floquet, cfg.integration
    if len(fl.omegas) < 2:
        raise ConfigurationError(f"floquet-check needs at least 2 drive frequencies (got {fl.omegas})")
    if any(not w > 0 for w in fl.omegas):
        raise ConfigurationError("drive frequencies must be positive")
    out = _out_dir(ctx, cfg, "floquet-check")
    spec = bath_spec(cfg)
    omega_e = cfg.emitter.omega_e
    tau = it.trace_every or 0.1
    schedules = [_schedule_at(cfg, spec, w) for w in fl.omegas]
    eff = EmitterSpec(schedules[0], omega_e).effective()
    ref = evolve(spec, eff, fl.t_final, it.dt, [fl.t_final], tau, ctx.obj["threads"])

    def one(sched: DriveSchedule):
        run = evolve(spec, EmitterSpec(sched, omega_e), fl.t_final, it.dt, [fl.t_final], tau, 1)
        dev = float(np.max(np.abs(run.trace_ce - ref.trace_ce)))
        corr = first_order_correction(sched, fl.j_max).norm if sched.is_step else float("nan")
        return [sched.omega, dev, first_order_bound(sched.g_max, sched.n_positions, sched.omega), corr]

    n_jobs = ctx.obj["threads"] or -1
    rows = Parallel(n_jobs=n_jobs, backend="threading")(delayed(one)(s) for s in schedules)
    p = layout.join(layout.family_dir(out, layout.F_SERIES), "floquet.csv")
    layout.write_csv(p, ["omega", "deviation", "bound", "correction_norm"], rows,
                     {"t_final": fl.t_final, "n_positions": schedules[0].n_positions,
                      "envelope": "step" if schedules[0].is_step else "raised_cosine"})
    devs = [r[1] for r in rows]
    summary = {"deviations": devs,
               "strictly_decreasing": all(b < a for a, b in zip(devs, devs[1:]))}
    layout.write_manifest(out, "floquet-check", config_document(cfg), TOOLKIT_VERSION,
                          {"series": ["series/floquet.csv"]}, summary)
    typer.echo(f"floquet-check: {len(rows)} drive frequencies -> {p}")


@app.command("floquet-check")
def floquet_check(ctx: typer.Context):
    """Deviation of moving versus time-averaged dynamics across a drive-frequency sweep."""
    _guarded(ctx, "floquet-check", lambda: _floquet_check(ctx))


# ------------------ interactions ------------------

def _interactions(ctx: typer.Context):
    cfg = _run_config(ctx)
    ia = cfg.interactions
    out = _out_dir(ctx, cfg, "interactions")
    workers = _workers(ctx)
    spec = bath_spec(cfg)
    common = cfg.model_copy(update={"emitter": cfg.emitter.model_copy(
        update={"center": [0] * spec.dimension, "schedule": None})})
    gk = _static_gk(emitter_spec(common, spec, workers), spec, workers)
    if gk is None:
        raise ConfigurationError("interactions need a nonzero coupling (g > 0)")
    omega_e = cfg.emitter.omega_e
    cm = collective_couplings(spec, gk, ia.positions, omega_e, ia.eta, workers)
    mdir = layout.family_dir(out, layout.F_MATRICES)
    files = export_matrices(cm, mdir, cfg.emitter.design)
    artifacts = {"matrices": [_rel(out, p) for p in files.values()], "series": []}
    summary: Dict[str, Any] = {
        "n_emitters": cm.n_emitters, "eta": cm.eta,
        "hermitian_residue": cm.hermitian_residue,
        "gamma_eigenvalues": cm.collective_rates().tolist(),
        "psd_margin": cm.psd_margin(),
        "gamma_11_vs_golden_rule": [float(cm.gamma[0, 0].real),
                                    golden_rule_rate(spec, gk, omega_e, ia.eta)],
    }
    if cm.n_emitters >= 2:
        summary["abs_gamma_12"] = float(abs(cm.gamma[0, 1]))
        summary["abs_J_12"] = float(abs(cm.J[0, 1]))

    if ia.extrapolate:
        ex = eta_extrapolation(spec, gk, ia.positions, omega_e, ia.eta_list, workers)
        xdir = layout.join(mdir, "extrapolated")
        os.makedirs(xdir, exist_ok=True)
        files = export_matrices(ex, xdir, cfg.emitter.design)
        artifacts["matrices"] += [_rel(out, p) for p in files.values()]
        p = layout.join(layout.family_dir(out, layout.F_SERIES), "eta_spreads.csv")
        layout.write_csv(p, ["eta_from", "eta_to", "spread"],
                         [[a, b, s] for a, b, s in zip(ex.eta_list, ex.eta_list[1:], ex.spreads)])
        artifacts["series"].append(_rel(out, p))
        summary["extrapolated_max_uncertainty"] = float(max(np.max(ex.uncertainty_J),
                                                            np.max(ex.uncertainty_gamma)))

    layout.write_manifest(out, "interactions", config_document(cfg), TOOLKIT_VERSION,
                          artifacts, summary)
    typer.echo(f"interactions: {cm.n_emitters} emitter(s) -> {mdir}")


@app.command()
def interactions(ctx: typer.Context):
    """Collective J and gamma matrices for the configured emitter positions."""
    _guarded(ctx, "interactions", lambda: _interactions(ctx))


# ------------------ spectral-density ------------------

def _spectral_density(ctx: typer.Context, bins: Optional[int]):
    cfg = _run_config(ctx)
    out = _out_dir(ctx, cfg, "spectral-density")
    workers = _workers(ctx)
    spec = bath_spec(cfg)
    gk = _static_gk(emitter_spec(cfg, spec, workers), spec, workers)
    if gk is None:
        raise ConfigurationError("spectral density needs a nonzero coupling (g > 0)")
    n = bins or cfg.observables.spectral_bins
    sd = spectral_density(gk, spec, n)
    dos = density_of_states(spec, n)
    p = layout.join(layout.family_dir(out, layout.F_SERIES), "spectral_density.csv")
    e = sd.bin_edges
    layout.write_csv(p, ["e_low", "e_high", "e_center", "d_eff", "dos"],
                     zip(e[:-1], e[1:], sd.centers, sd.values, dos.values),
                     {"design": cfg.emitter.design, "total_weight": sd.total_weight,
                      "g_ref": sd.g_ref})
    summary = {"total_weight": sd.total_weight, "g_ref": sd.g_ref,
               "golden_rule_rate": golden_rule_rate(spec, gk, cfg.emitter.omega_e)}
    layout.write_manifest(out, "spectral-density", config_document(cfg), TOOLKIT_VERSION,
                          {"series": ["series/spectral_density.csv"]}, summary)
    typer.echo(f"spectral-density: {n} bins -> {p}")


@app.command("spectral-density")
def spectral_density_cmd(ctx: typer.Context,
                         bins: Optional[int] = typer.Option(None, "--bins", help="Histogram bins over the band.")):
    """Effective spectral density of the configured coupling next to the bare density of states."""
    _guarded(ctx, "spectral-density", lambda: _spectral_density(ctx, bins))


if __name__ == "__main__":
    app()
