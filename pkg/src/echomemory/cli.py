"""Command-line front end: ``simulate``, ``sweep`` and ``check``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical blow-up,
4 simulation horizon shorter than a predicted echo.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import analytic
from .config import ConfigError, RunConfig, load_config, parse_alpha_list
from .ensemble import (
    GridError,
    HorizonError,
    NumericalBlowupError,
    efficiency_sweep,
    run_simulation,
    write_run_csv,
)
from .phasematch import direction_name, format_k
from .protocol import PulseSchedule, ScheduleError
from .svg import write_efficiency_figure

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_HORIZON = 4

ECHO_COLUMNS = ("time", "direction", "efficiency", "predicted_time", "predicted_sign")
SWEEP_COLUMNS = ("alphaL", "measured", "closed_form", "rel_error")

_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def _label(label: str) -> str:
    return label.translate(_SUB)


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _run_guarded(fn, *args) -> int:
    try:
        return fn(*args)
    except (ConfigError, ScheduleError, GridError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except HorizonError as exc:
        return _fail(EXIT_HORIZON, str(exc))
    except (NumericalBlowupError, FloatingPointError, OverflowError) as exc:
        return _fail(EXIT_BLOWUP, str(exc))


def _out_dir(cfg: RunConfig, out: str | None) -> Path:
    path = Path(out if out is not None else cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _simulate(cfg: RunConfig, out: str | None) -> int:
    schedule = cfg.build_schedule()
    run = run_simulation(schedule, cfg.medium, cfg.grid)
    out_dir = _out_dir(cfg, out)
    exit_dir = schedule.final_echo.k if schedule.final_echo and not schedule.final_echo.silent \
        else schedule.pulse("D").k
    write_run_csv(out_dir / "run.csv", run.times, run.exit_field(exit_dir))
    with open(out_dir / "echoes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ECHO_COLUMNS)
        for e in run.echoes:
            w.writerow((
                repr(e.echo_time),
                direction_name(e.direction),
                repr(e.efficiency),
                "" if e.predicted_time is None else repr(float(e.predicted_time)),
                "" if e.predicted_sign is None else e.predicted_sign,
            ))
    print(f"alphaL = {cfg.medium.optical_depth:g}; {len(run.echoes)} echo(es) written to {out_dir}")
    for e in run.echoes:
        print(f"  {e.label or '?'}: {direction_name(e.direction)}, t={e.echo_time:.4f}, "
              f"efficiency={e.efficiency:.4f}")
    return EXIT_OK


def _sweep(cfg: RunConfig, out: str | None, alpha_text: str | None) -> int:
    alphas = cfg.sweep_alpha_l if alpha_text is None else parse_alpha_list(alpha_text)
    if not alphas:
        raise ConfigError("alphaL list is empty")
    schedule = cfg.build_schedule()
    result = efficiency_sweep(schedule, cfg.medium, alphas, cfg.grid)
    out_dir = _out_dir(cfg, out)
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for a, meas, closed in result.rows:
            rel = abs(meas - closed) / closed if closed and math.isfinite(closed) else math.nan
            w.writerow((repr(a), repr(meas), repr(closed), repr(rel)))
    write_efficiency_figure(out_dir / "fig2.svg", result.alpha_l, result.measured)
    for a, meas, closed in result.rows:
        print(f"alphaL = {a:g}: measured {meas:.4f}, closed form {closed:.4f}")
    return EXIT_OK


def check_report(schedule: PulseSchedule) -> str:
    """Human-readable summary of the stage algebra and phase matching of a schedule."""
    lines = [f"protocol: {schedule.kind.value} (control order: {schedule.control_order.value})"]
    lines.append("pulses:")
    for p in schedule.pulses:
        lines.append(f"  {p.name}: t={p.arrival:g}, area={p.area / math.pi:g}π, k = {format_k(p.k)}")
    lines.append("stages:")
    for st in schedule.stages:
        e = st.expr
        what = "spin-stored" if e.carrier == analytic.SPIN_CARRIER else (
            "emissive" if e.emissive else "absorptive")
        k = "-" if st.k is None else format_k(st.k)
        lines.append(f"  after {st.after}: sign {e.prefactor_sign:+d} ({what}), k = {k}")
    lines.append("echoes:")
    for p in schedule.predictions:
        lab = _label(p.label)
        if p.silent:
            lines.append(f"  {lab}: k = {format_k(p.k)}, silent, t={p.time:g}")
        elif not p.emissive:
            lines.append(f"  {lab}: absorptive — not radiated, t={p.time:g}, k = {format_k(p.k)}")
        else:
            lines.append(f"  {lab}: {direction_name(p.k)}, emissive, t={p.time:g}, k = {format_k(p.k)}")
    if schedule.has("C1") and schedule.has("C2"):
        lines.append(f"storage time: {schedule.storage_time():g}")
    if schedule.has("R2") and schedule.has("C1"):
        lines.append("controlled double rephasing formula t_C2 - t_C1 + 2(t_R2 - t_R1) + t_D: "
                     f"{analytic.cdr_echo_time(schedule.t_d, schedule.t_r1, schedule.t_r2, schedule.t_c1, schedule.t_c2):g}")
    return "\n".join(lines)


def _check(cfg: RunConfig) -> int:
    print(check_report(cfg.build_schedule()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="echomemory", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "run one simulation"),
                        ("sweep", "efficiency versus optical depth"),
                        ("check", "print the analytic echo report")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--out", default=None, help="output directory (default from config)")
        if name == "sweep":
            p.add_argument("--alphaL", dest="alpha_l", default=None,
                           help="comma-separated optical depths (default from config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if args.command == "simulate":
        return _run_guarded(_simulate, cfg, args.out)
    if args.command == "sweep":
        return _run_guarded(_sweep, cfg, args.out, args.alpha_l)
    return _run_guarded(_check, cfg)


if __name__ == "__main__":
    sys.exit(main())
