"""Command-line front end.

Exit codes: 0 ok, 2 configuration or input error, 3 numerical failure,
4 infeasible design budget, 5 simulator instability.

Everything printed or written is a deterministic function of the inputs:
JSON keys are sorted and floats are rounded to 10 significant digits.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from hairclip import __version__
from hairclip import analysis, design, mechanics, simulation
from hairclip.config import ToolConfig, load_config, load_suite
from hairclip.special import BesselDomainError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INFEASIBLE = 4
EXIT_INSTABILITY = 5

_SIG = 10


class _Exit(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _clean(obj):
    """Round floats for stable output; non-finite values become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{_SIG}g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _text(obj, prefix: str = "") -> list[str]:
    lines = []
    for k in sorted(obj):
        v = obj[k]
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            lines.extend(_text(v, key + "."))
        elif isinstance(v, list):
            lines.append(f"{key} = [{', '.join(_fmt(x) for x in v)}]")
        else:
            lines.append(f"{key} = {_fmt(v)}")
    return lines


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _columns(header: list[str], cols: list[np.ndarray], blocks: list[int] | None = None) -> str:
    """Whitespace-separated plot data; ``blocks`` inserts blank lines before those rows."""
    lines = ["# " + " ".join(header)]
    breaks = set(blocks or [])
    for i, row in enumerate(zip(*cols)):
        if i in breaks:
            lines.append("")
        lines.append(" ".join(f"{float(v):.9e}" for v in row))
    return "\n".join(lines) + "\n"


class _Output:
    """Routes the report to stdout and artifacts to the output directory."""

    def __init__(self, args, cfg: ToolConfig) -> None:
        self.json = bool(getattr(args, "json", False) or cfg.output.json)
        out = getattr(args, "out", None) or cfg.output.dir
        self.dir = Path(out) if out else None
        self.plot = bool(getattr(args, "plot_data", False) or cfg.output.plot_data)

    def artifact(self, name: str, text: str) -> str | None:
        if self.dir is None:
            return None
        path = self.dir / name
        _write_atomic(path, text)
        return str(path)

    def plot_file(self, name: str, text: str) -> None:
        if self.plot:
            _write_atomic((self.dir or Path(".")) / name, text)

    def report(self, payload: dict, title: str, artifact: str | None = None) -> None:
        if artifact:
            self.artifact(artifact, dumps(payload))
        if self.json:
            sys.stdout.write(dumps(payload))
        else:
            sys.stdout.write("\n".join([f"# {title}"] + _text(_clean(payload))) + "\n")


def _design_row(p: design.DesignPoint) -> dict:
    return {
        "l_mm": p.l * 1e3,
        "D_mm": p.D * 1e3,
        "psi_l_rad": p.psi_l,
        "U_barr_mJ": p.U_barr * 1e3,
        "P_cr_N": p.P_cr,
        "t_star_ms": p.t_star * 1e3,
    }


_CONVENTION_NOTE = {
    mechanics.Convention.PAPER_LITERAL: "EI_eta = E h^3 t / 12 (strong-axis formula)",
    mechanics.Convention.WEAK_AXIS: "EI_eta = E h t^3 / 12 (weak-axis formula)",
}


def cmd_analyze(args, cfg: ToolConfig) -> int:
    rep = mechanics.analyze_design(cfg.material, cfg.geometry, cfg.convention, stroke=cfg.robot.stroke)
    sol, ls = rep.solution, rep.landscape
    mass = cfg.robot.total_mass
    payload = {
        "command": "analyze",
        "convention": cfg.convention.value,
        "convention_note": _CONVENTION_NOTE[cfg.convention],
        "inputs": {
            "E_MPa": cfg.material.E / 1e6,
            "nu": cfg.material.nu,
            "G_MPa": cfg.material.G / 1e6,
            "rho_s_kg_m3": cfg.material.rho_s,
            "l_mm": cfg.geometry.l * 1e3,
            "D_mm": cfg.geometry.D * 1e3,
            "h_mm": cfg.geometry.h * 1e3,
            "t_mm": cfg.geometry.t * 1e3,
        },
        "load_constant": mechanics.load_constant(),
        "EI_eta_N_m2": rep.section.EI_eta,
        "C_N_m2": rep.section.C,
        "P_cr_N": sol.P_cr,
        "A1": sol.A1,
        "psi_l_rad": sol.psi_l,
        "U_barr_mJ": rep.U_barr * 1e3,
        "t_star_ms": rep.t_star * 1e3,
        "landscape": {
            "stroke_mm": ls.stroke * 1e3,
            "barrier_mJ": ls.U_barr * 1e3,
            "s_ext_mm": ls.s_ext * 1e3,
            "s_flex_mm": ls.s_flex * 1e3,
            "max_force_N": ls.max_slope,
            "well_stiffness_N_m": ls.curvature(0.0),
        },
        "static_deflection": {
            "mass_g": mass * 1e3,
            "deflection_mm": {k: analysis.static_deflection(mass, K) for k, K in sorted(cfg.stiffness.items())},
        },
    }
    out = _Output(args, cfg)
    out.report(payload, f"analyze [{cfg.convention.value}] {_CONVENTION_NOTE[cfg.convention]}", "analyze.json")
    if out.plot:
        s = np.linspace(0.0, ls.stroke, 101)
        out.plot_file("landscape.dat", _columns(["s_mm", "U_mJ"], [s * 1e3, [ls.energy(v) * 1e3 for v in s]]))
        z = np.linspace(0.0, cfg.geometry.l, 101)[:-1]
        out.plot_file("mode_shape.dat", _columns(["z_mm", "phi_rad"], [z * 1e3, [sol.mode_shape(v) for v in z]]))
    return EXIT_OK


def _parse_range(text: str, name: str) -> tuple[float, float, float]:
    try:
        parts = [float(v) / 1e3 for v in text.split(",")]
    except ValueError:
        raise _Exit(EXIT_CONFIG, f"{name}: expected min,max,step in mm, got {text!r}") from None
    if len(parts) != 3:
        raise _Exit(EXIT_CONFIG, f"{name}: expected min,max,step in mm, got {text!r}")
    return parts[0], parts[1], parts[2]


def _grid(args, cfg: ToolConfig) -> design.DesignGrid:
    grid = cfg.grid
    changes = {}
    if getattr(args, "l_range", None):
        changes["l_range"] = _parse_range(args.l_range, "--l-range")
    if getattr(args, "D_range", None):
        changes["D_range"] = _parse_range(args.D_range, "--D-range")
    try:
        return dataclasses.replace(grid, **changes) if changes else grid
    except mechanics.ValidationError as exc:
        raise _Exit(EXIT_CONFIG, str(exc)) from None


def cmd_sweep(args, cfg: ToolConfig) -> int:
    grid = _grid(args, cfg)
    workers = args.workers or cfg.sweep_workers
    points = design.sweep(grid, workers=workers)
    text = design.write_csv(points)
    out = _Output(args, cfg)
    path = out.artifact("sweep.csv", text)
    valid = [p for p in points if p.ok]
    payload = {
        "command": "sweep",
        "convention": grid.convention.value,
        "grid_shape": list(grid.shape),
        "nodes": len(points),
        "rows": len(valid),
        "invalid": [{"l_mm": p.l * 1e3, "D_mm": p.D * 1e3, "error": p.error} for p in points if not p.ok],
        "psi_l_rad_range": [min(p.psi_l for p in valid), max(p.psi_l for p in valid)] if valid else None,
        "U_barr_mJ_range": [min(p.U_barr for p in valid) * 1e3, max(p.U_barr for p in valid) * 1e3] if valid else None,
        "csv": path,
    }
    if path is None and not out.json:
        sys.stdout.write(text)
    else:
        out.report(payload, f"sweep [{grid.convention.value}]")
    if out.plot and valid:
        # blank line between l rows so gnuplot-style readers see a surface
        breaks = [i for i in range(1, len(valid)) if valid[i].l != valid[i - 1].l]
        cols = [np.array([p.l for p in valid]) * 1e3, np.array([p.D for p in valid]) * 1e3,
                np.array([p.psi_l for p in valid]), np.array([p.U_barr for p in valid]) * 1e3]
        out.plot_file("surface.dat", _columns(["l_mm", "D_mm", "psi_l_rad", "U_barr_mJ"], cols, breaks))
    return EXIT_OK


def cmd_optimize(args, cfg: ToolConfig) -> int:
    grid = _grid(args, cfg)
    changes = {}
    if args.target:
        changes["target"] = design.Target(args.target)
    if args.budget_mJ is not None:
        changes["budget"] = args.budget_mJ / 1e3
    if args.levels is not None:
        changes["levels"] = args.levels
    try:
        obj = dataclasses.replace(cfg.objective, **changes) if changes else cfg.objective
    except mechanics.ValidationError as exc:
        raise _Exit(EXIT_CONFIG, str(exc)) from None
    res = design.optimize(obj, grid, workers=args.workers or cfg.sweep_workers)
    best = res.best
    active = []
    if res.budget_active:
        active.append("budget")
    l_lo, l_hi = grid.l_values[0], grid.l_values[-1]
    d_lo, d_hi = grid.D_values[0], grid.D_values[-1]
    if obj.l_bounds:
        l_lo, l_hi = max(l_lo, obj.l_bounds[0]), min(l_hi, obj.l_bounds[1])
    if obj.D_bounds:
        d_lo, d_hi = max(d_lo, obj.D_bounds[0]), min(d_hi, obj.D_bounds[1])
    for name, v, lo, hi in (("l", best.l, l_lo, l_hi), ("D", best.D, d_lo, d_hi)):
        if math.isclose(v, lo, rel_tol=1e-9):
            active.append(f"{name}_min")
        if math.isclose(v, hi, rel_tol=1e-9):
            active.append(f"{name}_max")
    payload = {
        "command": "optimize",
        "convention": grid.convention.value,
        "target": obj.target.value,
        "budget_mJ": obj.budget * 1e3 if math.isfinite(obj.budget) else None,
        "best": _design_row(best),
        "coarse_best": _design_row(res.coarse_best),
        "objective_value": res.objective_value,
        "active_constraints": active,
        "evaluations": res.evaluations,
        "refinement_boxes_mm": [[v * 1e3 for v in box] for box in res.boxes],
    }
    _Output(args, cfg).report(payload, f"optimize [{grid.convention.value}]", "optimize.json")
    return EXIT_OK


def _robot(args, cfg: ToolConfig) -> simulation.RobotConfig:
    robot = cfg.robot
    changes = {}
    if args.frequency is not None:
        changes["frequency"] = args.frequency
    if args.substrate:
        changes["substrate"] = simulation.SUBSTRATES[args.substrate]
    if args.mode:
        changes["mode"] = simulation.GaitMode(args.mode)
    if not changes:
        return robot
    try:
        return dataclasses.replace(robot, **changes)
    except (simulation.ConfigError, mechanics.ValidationError) as exc:
        raise _Exit(EXIT_CONFIG, f"robot: {exc}") from None


def _simulate_one(args, cfg: ToolConfig) -> int:
    robot = _robot(args, cfg)
    duration = args.duration if args.duration is not None else cfg.simulation.duration
    dt = args.dt if args.dt is not None else cfg.simulation.dt
    traj = simulation.run_gait(robot, duration, dt=dt, sample_rate=cfg.simulation.sample_rate)
    gm = analysis.gait_metrics(traj, body_length=robot.body_length)
    jm = analysis.jump_metrics(traj)
    out = _Output(args, cfg)
    csv_path = out.artifact("trajectory.csv", simulation.write_trajectory_csv(traj))
    metrics = {**gm.as_dict(), **jm.as_dict()}
    missing = metrics.pop("missing", {})
    payload = {
        "command": "simulate",
        "frequency_Hz": robot.frequency,
        "substrate": robot.substrate.name,
        "mu_plastic": robot.substrate.mu_plastic,
        "mu_rubber": robot.substrate.mu_rubber,
        "mode": robot.mode.value,
        "duration_s": traj.duration,
        "dt_s": dt,
        "metrics": metrics,
        "missing": missing,
        "energy": {
            "injected_mJ": traj.injected_energy * 1e3,
            "dissipated_mJ": float(traj.e_dissipated[-1]) * 1e3,
            "audit_error": traj.audit_error(),
        },
        "trajectory_csv": csv_path,
    }
    out.report(payload, f"simulate [{robot.substrate.name}, {robot.frequency:g} Hz, {robot.mode.value}]",
               "metrics.json")
    if out.plot:
        mf, mh = robot.masses
        y = (mf * traj.y_fore + mh * traj.y_hind) / (mf + mh)
        out.plot_file("trajectory.dat", _columns(["t_s", "x_com_mm", "y_com_mm", "s_mm"],
                                                 [traj.t, traj.x_com * 1e3, y * 1e3, traj.s * 1e3]))
    return EXIT_OK


def _simulate_suite(args, cfg: ToolConfig) -> int:
    entries, workers = load_suite(args.suite, cfg)
    if args.workers:
        workers = args.workers
    rows = simulation.experiment_suite(entries, workers=workers)
    text = simulation.write_suite_csv(rows)
    out = _Output(args, cfg)
    path = out.artifact("suite.csv", text)
    good = [r for r in rows if r.error is None]
    fit = None
    if len({r.freq_hz for r in good}) >= 2:
        a, b, r2 = analysis.linear_fit_r2([r.freq_hz for r in good], [r.speed_mm_s for r in good])
        fit = {"slope_mm_s_per_Hz": a, "intercept_mm_s": b, "r2": r2}
    for r in rows:
        if r.error:
            print(f"suite entry {r.label!r} failed: {r.error}", file=sys.stderr)
    payload = {
        "command": "simulate-suite",
        "rows": [
            {"label": r.label, "freq_hz": r.freq_hz, "substrate": r.substrate, "speed_mm_s": r.speed_mm_s,
             "speed_bl_s": r.speed_bl_s, "air_frac": r.air_frac, "energy_mJ": r.energy_mJ, "error": r.error}
            for r in rows
        ],
        "speed_vs_frequency_fit": fit,
        "suite_csv": path,
    }
    if out.json:
        out.report(payload, "simulate suite")
    else:
        if path is None:
            sys.stdout.write(text)
        if fit is None:
            sys.stdout.write("# linear fit of speed on frequency: n/a (fewer than 2 distinct frequencies)\n")
        else:
            sys.stdout.write(f"# linear fit of speed on frequency: slope = {fit['slope_mm_s_per_Hz']:.6g} mm/s/Hz, "
                             f"intercept = {fit['intercept_mm_s']:.6g} mm/s, R2 = {fit['r2']:.6f}\n")
    if path is not None:
        out.artifact("suite.json", dumps(payload))
    if out.plot and good:
        out.plot_file("speed_vs_frequency.dat", _columns(["freq_hz", "speed_mm_s"],
                                                         [[r.freq_hz for r in good], [r.speed_mm_s for r in good]]))
    if any(r.error and r.error.startswith("SimulationInstability") for r in rows):
        return EXIT_INSTABILITY
    return EXIT_OK if len(good) == len(rows) else EXIT_CONFIG


def cmd_simulate(args, cfg: ToolConfig) -> int:
    if args.suite:
        return _simulate_suite(args, cfg)
    return _simulate_one(args, cfg)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Exit(EXIT_CONFIG, f"cannot read {path}: {exc.strerror}") from None


def cmd_fit_bending(args, cfg: ToolConfig) -> int:
    rec = analysis.read_bending_csv(_read_text(args.file), span_mm=args.span_mm)
    region = None
    if args.region_mm:
        try:
            lo, hi = (float(v) for v in args.region_mm.split(","))
        except ValueError:
            raise _Exit(EXIT_CONFIG, f"--region-mm: expected lo,hi, got {args.region_mm!r}") from None
        region = (lo, hi)
    fit = analysis.fit_stiffness(rec, region)
    mass = args.mass_g / 1e3 if args.mass_g is not None else cfg.robot.total_mass
    payload = {
        "command": "fit-bending",
        "samples": len(rec.disp_mm),
        "span_mm": rec.span_mm,
        "K_N_mm": fit.K,
        "K_stderr_N_mm": fit.stderr,
        "fit_samples": fit.n,
        "fit_region_mm": list(fit.region),
        "barrier_mJ": analysis.barrier_from_curve(rec),
        "mass_g": mass * 1e3,
        "static_deflection_mm": analysis.static_deflection(mass, fit.K) if fit.K > 0 else None,
    }
    out = _Output(args, cfg)
    out.report(payload, f"fit-bending {Path(args.file).name}", "fit_bending.json")
    if out.plot:
        fitted = fit.K * (rec.disp_mm - rec.disp_mm.mean()) + rec.load_N.mean()
        out.plot_file("bending.dat", _columns(["disp_mm", "load_N", "fit_load_N"], [rec.disp_mm, rec.load_N, fitted]))
    return EXIT_OK


def cmd_metrics(args, cfg: ToolConfig) -> int:
    trace = analysis.read_trace_csv(_read_text(args.file), period=args.period_s)
    body = args.body_length_mm / 1e3 if args.body_length_mm is not None else cfg.robot.body_length
    gm = analysis.gait_metrics(trace, body_length=body, air_threshold=args.air_threshold_mm / 1e3)
    metrics = gm.as_dict()
    missing = metrics.pop("missing", {})
    if trace.y is None:
        missing["jump_air_time_ms"] = missing["jump_apex_mm"] = "no height channel"
        metrics["jump_air_time_ms"] = metrics["jump_apex_mm"] = None
    else:
        metrics.update(analysis.jump_metrics(trace, threshold=args.jump_threshold_mm / 1e3).as_dict())
    payload = {
        "command": "metrics",
        "samples": len(trace.t),
        "body_length_mm": body * 1e3,
        "period_s": args.period_s,
        "metrics": metrics,
        "missing": missing,
    }
    _Output(args, cfg).report(payload, f"metrics {Path(args.file).name}", "metrics.json")
    return EXIT_OK


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON config file (default: reference chassis)")
    parser.add_argument("--json", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="print the report as JSON")
    parser.add_argument("--out", default=default, help="directory for CSV/JSON artifacts")
    parser.add_argument("--plot-data", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="also write whitespace-separated column files for plotting")
    parser.add_argument("--convention", choices=[c.value for c in mechanics.Convention], default=default,
                        help="bending-stiffness convention (overrides the config)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hairclip", description="Hair-clip mechanism design and crawler gait toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    add("analyze", cmd_analyze, "buckling, barrier, timescale and deflection report for one design")

    for name, func, help_ in (("sweep", cmd_sweep, "evaluate the (l, D) design grid"),
                              ("optimize", cmd_optimize, "best design under an energy budget")):
        sp = add(name, func, help_)
        sp.add_argument("--l-range", help="min,max,step in mm")
        sp.add_argument("--D-range", dest="D_range", help="min,max,step in mm")
        sp.add_argument("--workers", type=int, default=None)
        if name == "optimize":
            sp.add_argument("--target", choices=[t.value for t in design.Target])
            sp.add_argument("--budget-mJ", dest="budget_mJ", type=float)
            sp.add_argument("--levels", type=int)

    sp = add("simulate", cmd_simulate, "run the crawler gait simulator")
    sp.add_argument("--suite", help="JSON suite file; writes one CSV row per entry")
    sp.add_argument("--frequency", type=float, help="actuation frequency in Hz")
    sp.add_argument("--substrate", choices=sorted(simulation.SUBSTRATES))
    sp.add_argument("--mode", choices=[m.value for m in simulation.GaitMode])
    sp.add_argument("--duration", type=float, help="seconds")
    sp.add_argument("--dt", type=float, help="integrator step in seconds")
    sp.add_argument("--workers", type=int, default=None)

    sp = add("fit-bending", cmd_fit_bending, "stiffness and barrier from a disp_mm,load_N CSV")
    sp.add_argument("file")
    sp.add_argument("--region-mm", help="lo,hi displacement window for the fit")
    sp.add_argument("--span-mm", type=float, default=180.0)
    sp.add_argument("--mass-g", type=float, help="mass for the static deflection (default: robot mass)")

    sp = add("metrics", cmd_metrics, "gait and jump metrics from a t_s,x_mm[,y_mm][,psi1_deg,psi2_deg] CSV")
    sp.add_argument("file")
    sp.add_argument("--body-length-mm", type=float, help="default: robot L_mm from the config")
    sp.add_argument("--period-s", type=float, help="actuation period for stride segmentation")
    sp.add_argument("--air-threshold-mm", type=float, default=1.0)
    sp.add_argument("--jump-threshold-mm", type=float, default=1.0)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, convention=args.convention)
        return args.func(args, cfg)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except design.InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except simulation.SimulationInstability as exc:
        print(f"simulation unstable: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except (mechanics.QuadratureError, BesselDomainError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (simulation.ConfigError, mechanics.ValidationError, analysis.AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
