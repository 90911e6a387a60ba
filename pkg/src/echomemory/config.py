"""Run configuration stored as a sectioned INI file.

Sections and keys::

    [medium]    alpha, length, inhom_width, t2_optical, profile
    [grid]      n_z, n_delta, delta_span, dt, t_end, seed
    [schedule]  kind, control_order, t_d, t_r1, t_r2, t_c1, t_c2,
                d_area, d_duration, r1_area, r2_area, c1_area, c2_area,
                r_duration, c_duration, k_d, k_r1, k_r2, k_c1, k_c2
    [output]    dir, sweep_alphaL

Optional keys (``t_end``, ``seed``, unset pulse times and ``k_r1``/``k_r2``)
are simply left out.  Floats are written with ``repr`` so a round trip is exact.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .ensemble import GridError, MediumConfig, SimGrid
from .protocol import ControlOrder, ProtocolKind, PulseSchedule, ScheduleError, build_schedule

__all__ = ["ConfigError", "ScheduleConfig", "RunConfig", "load_config", "dump_config", "parse_alpha_list"]

_SECTIONS = ("medium", "grid", "schedule", "output")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleConfig:
    kind: str = "cdr"
    control_order: str = "after"
    t_d: float = 5.0
    t_r1: float | None = None
    t_r2: float | None = None
    t_c1: float | None = None
    t_c2: float | None = None
    d_area: float = 0.05
    d_duration: float = 1.0
    r1_area: float = math.pi
    r2_area: float = math.pi
    c1_area: float = math.pi
    c2_area: float = math.pi
    r_duration: float = 0.0
    c_duration: float = 0.0
    k_d: int = 1
    k_r1: int | None = None
    k_r2: int | None = None
    k_c1: int = 1
    k_c2: int = -1

    def build(self) -> PulseSchedule:
        kw = asdict(self)
        kind = kw.pop("kind")
        return build_schedule(kind, **kw)


@dataclass(frozen=True)
class RunConfig:
    medium: MediumConfig = field(default_factory=lambda: MediumConfig(alpha=3.0))
    grid: SimGrid = field(default_factory=SimGrid)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    out_dir: str = "out"
    sweep_alpha_l: tuple[float, ...] = (0.5, 1.0, 2.0, 3.0, 4.0)

    def build_schedule(self) -> PulseSchedule:
        return self.schedule.build()

    def to_ini(self) -> str:
        cp = _parser()
        for name, obj in (("medium", self.medium), ("grid", self.grid), ("schedule", self.schedule)):
            cp[name] = {f.name: _fmt(getattr(obj, f.name)) for f in fields(obj)
                        if getattr(obj, f.name) is not None}
        cp["output"] = {"dir": self.out_dir,
                        "sweep_alphaL": ",".join(repr(float(a)) for a in self.sweep_alpha_l)}
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines.extend(f"{k} = {v}" for k, v in cp[sec].items())
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = _parser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        extra = set(cp.sections()) - set(_SECTIONS)
        if extra:
            raise ConfigError(f"unknown config section(s): {sorted(extra)}")
        try:
            medium = MediumConfig(**_section(cp, "medium", MediumConfig))
            grid = SimGrid(**_section(cp, "grid", SimGrid))
            sched = ScheduleConfig(**_section(cp, "schedule", ScheduleConfig))
        except (GridError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        out = cp["output"] if cp.has_section("output") else {}
        unknown = set(out) - {"dir", "sweep_alphaL"}
        if unknown:
            raise ConfigError(f"unknown key(s) in [output]: {sorted(unknown)}")
        kw = {}
        if "dir" in out:
            kw["out_dir"] = out["dir"]
        if "sweep_alphaL" in out:
            kw["sweep_alpha_l"] = parse_alpha_list(out["sweep_alphaL"], allow_empty=True)
        return cls(medium, grid, sched, **kw)


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    return cp


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_NULLABLE = {"t_end", "seed", "t_r1", "t_r2", "t_c1", "t_c2", "k_r1", "k_r2"}


def _convert(name: str, raw: str):
    raw = raw.strip()
    if name in _NULLABLE and raw.lower() in ("", "none"):
        return None
    if name in ("kind", "profile", "control_order"):
        return raw
    if name.startswith(("n_", "k_")) or name == "seed":
        return int(raw)
    return float(raw)


def _section(cp: configparser.ConfigParser, name: str, cls) -> dict:
    if not cp.has_section(name):
        return {}
    known = {f.name for f in fields(cls)}
    out = {}
    for key, raw in cp[name].items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in [{name}]")
        try:
            out[key] = _convert(key, raw)
        except ValueError:
            raise ConfigError(f"[{name}] {key} = {raw!r} is not a valid value") from None
    return out


def parse_alpha_list(text: str, allow_empty: bool = False) -> tuple[float, ...]:
    """Comma-separated optical depths, each finite and >= 0."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts and not allow_empty:
        raise ConfigError("alphaL list is empty")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"alphaL list {text!r} is not a list of numbers") from None
    if any(not (math.isfinite(v) and v >= 0) for v in vals):
        raise ConfigError("alphaL values must be finite and >= 0")
    return vals


def load_config(path: "str | Path") -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = RunConfig.from_ini(text)
    try:
        ProtocolKind.parse(cfg.schedule.kind)
        ControlOrder(cfg.schedule.control_order)
    except (ValueError, ScheduleError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def dump_config(cfg: RunConfig, path: "str | Path") -> None:
    Path(path).write_text(cfg.to_ini())
