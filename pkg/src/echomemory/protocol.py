"""Pulse sequences for the echo protocols and their validation.

A schedule is a time-ordered tuple of :class:`Pulse` objects.  Building one
validates it completely and attaches the predicted echoes (time, wavevector
index, silence, coherence sign) computed from :mod:`echomemory.analytic` and
:mod:`echomemory.phasematch`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from . import phasematch as pm
from .analytic import SPIN_CARRIER, CoherenceExpression, coherence_stages
from .bloch import CONTROL, OPTICAL

__all__ = [
    "ScheduleError",
    "ProtocolKind",
    "ControlOrder",
    "Pulse",
    "EchoPrediction",
    "Stage",
    "PulseSchedule",
    "build_schedule",
    "storage_time",
    "MAX_DATA_AREA",
]

MAX_DATA_AREA = 0.1
# minimum separation between the data pulse and the first strong pulse, in data durations
DATA_CLEARANCE = 3.0


class ScheduleError(ValueError):
    pass


class ProtocolKind(str, Enum):
    TWO_PULSE_ECHO = "2pe"
    DOUBLE_REPHASING = "dr"
    CDR = "cdr"
    CONTROLLED_SINGLE_REPHASING = "csr"
    DATA_ONLY = "data"

    @classmethod
    def parse(cls, value: "str | ProtocolKind") -> "ProtocolKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "twopulseecho": cls.TWO_PULSE_ECHO,
            "two-pulse-echo": cls.TWO_PULSE_ECHO,
            "doublerephasing": cls.DOUBLE_REPHASING,
            "double-rephasing": cls.DOUBLE_REPHASING,
            "controlledsinglerephasing": cls.CONTROLLED_SINGLE_REPHASING,
            "controlled-single-rephasing": cls.CONTROLLED_SINGLE_REPHASING,
            "data-only": cls.DATA_ONLY,
        }
        key = str(value).strip().lower()
        try:
            return aliases.get(key) or cls(key)
        except ValueError:
            raise ScheduleError(f"unknown protocol kind {value!r}") from None


class ControlOrder(str, Enum):
    AFTER = "after"  # D, R1, R2, C1, C2
    BETWEEN = "between"  # D, R1, C1, C2, R2


_REQUIRED = {
    ProtocolKind.DATA_ONLY: {"D"},
    ProtocolKind.TWO_PULSE_ECHO: {"D", "R1"},
    ProtocolKind.DOUBLE_REPHASING: {"D", "R1", "R2"},
    ProtocolKind.CDR: {"D", "R1", "R2", "C1", "C2"},
    ProtocolKind.CONTROLLED_SINGLE_REPHASING: {"D", "R1", "C1", "C2"},
}

_KIND_OF_NAME = {"D": "data", "R1": "rephase", "R2": "rephase", "C1": "control", "C2": "control"}
_TRANSITION = {"data": OPTICAL, "rephase": OPTICAL, "control": CONTROL}


@dataclass(frozen=True)
class Pulse:
    name: str
    kind: str
    transition: str
    area: float
    arrival: float
    duration: float = 0.0
    k: int = pm.FORWARD

    @property
    def impulsive(self) -> bool:
        return self.duration == 0.0

    @property
    def start(self) -> float:
        return self.arrival - 0.5 * self.duration

    @property
    def end(self) -> float:
        return self.arrival + 0.5 * self.duration


@dataclass(frozen=True)
class EchoPrediction:
    label: str
    time: float
    k: int
    sign: int

    @property
    def silent(self) -> bool:
        return pm.is_silent(self.k)

    @property
    def direction(self) -> int | None:
        return pm.direction(self.k)

    @property
    def emissive(self) -> bool:
        return self.sign < 0

    @property
    def radiated(self) -> bool:
        """Phase matched and emissive."""
        return not self.silent and self.emissive


@dataclass(frozen=True)
class Stage:
    """Interval following a pulse: coherence expression and its wavevector index."""

    after: str
    start: float
    end: float
    expr: CoherenceExpression
    k: int | None  # None while the coherence sits in the spin state


@dataclass(frozen=True)
class PulseSchedule:
    kind: ProtocolKind
    pulses: tuple[Pulse, ...]
    control_order: ControlOrder = ControlOrder.AFTER
    stages: tuple[Stage, ...] = field(init=False, repr=False)
    predictions: tuple[EchoPrediction, ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind.parse(self.kind))
        object.__setattr__(self, "control_order", ControlOrder(self.control_order))
        object.__setattr__(self, "pulses", tuple(self.pulses))
        _validate(self)
        stages = _stages(self)
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "predictions", _predict(self, stages))
        if self.kind != ProtocolKind.DATA_ONLY and self.final_echo is None:
            raise ScheduleError("the last pulse leaves no rephasing ahead: no final echo is formed")

    def has(self, name: str) -> bool:
        return any(p.name == name for p in self.pulses)

    def pulse(self, name: str) -> Pulse:
        for p in self.pulses:
            if p.name == name:
                return p
        raise KeyError(name)

    def _time(self, name: str) -> float | None:
        return self.pulse(name).arrival if self.has(name) else None

    t_d = property(lambda self: self._time("D"))
    t_r1 = property(lambda self: self._time("R1"))
    t_r2 = property(lambda self: self._time("R2"))
    t_c1 = property(lambda self: self._time("C1"))
    t_c2 = property(lambda self: self._time("C2"))

    @property
    def T(self) -> float | None:
        return None if self.t_r1 is None else self.t_r1 - self.t_d

    @property
    def delta_T(self) -> float | None:
        if self.t_c1 is None:
            return None
        ref = self.t_r2 if self.control_order == ControlOrder.AFTER and self.t_r2 is not None else self.t_r1
        return self.t_c1 - ref

    @property
    def d_duration(self) -> float:
        return self.pulse("D").duration

    @property
    def final_echo(self) -> EchoPrediction | None:
        if not self.predictions:
            return None
        last = self.predictions[-1]
        return last if last.time > self.pulses[-1].end else None

    def storage_time(self) -> float:
        return storage_time(self)

    def k_at(self, t: float) -> int | None:
        """Wavevector index of the optical coherence in force at time ``t``."""
        current = None
        for st in self.stages:
            if st.start <= t:
                current = st.k
        return current


def storage_time(schedule: PulseSchedule) -> float:
    """Spin-storage interval ``t_C2 - t_C1``."""
    if not (schedule.has("C1") and schedule.has("C2")):
        raise ScheduleError("schedule has no control pair")
    return schedule.t_c2 - schedule.t_c1


def _validate(s: PulseSchedule) -> None:
    names = [p.name for p in s.pulses]
    if len(set(names)) != len(names):
        raise ScheduleError(f"duplicate pulse names in {names}")
    unknown = set(names) - set(_KIND_OF_NAME)
    if unknown:
        raise ScheduleError(f"unknown pulse names {sorted(unknown)}")
    present = set(names)
    if ("C1" in present) != ("C2" in present):
        raise ScheduleError("control pulses must come as a pair (C1 and C2) or not at all")
    required = _REQUIRED[s.kind]
    missing = required - present
    if missing:
        raise ScheduleError(f"{s.kind.value} requires pulses {sorted(missing)}")
    extra = present - required
    if extra:
        raise ScheduleError(f"{s.kind.value} does not allow pulses {sorted(extra)}")

    for p in s.pulses:
        if p.kind != _KIND_OF_NAME[p.name]:
            raise ScheduleError(f"{p.name} must be a {_KIND_OF_NAME[p.name]} pulse, got {p.kind!r}")
        if p.transition != _TRANSITION[p.kind]:
            raise ScheduleError(f"{p.kind} pulse {p.name} must drive {_TRANSITION[p.kind]}")
        for attr in ("area", "arrival", "duration"):
            v = getattr(p, attr)
            if not math.isfinite(v):
                raise ScheduleError(f"{p.name}.{attr} must be finite")
        if p.area < 0:
            raise ScheduleError(f"{p.name} has negative area {p.area}")
        if p.duration < 0:
            raise ScheduleError(f"{p.name} has negative duration {p.duration}")
        if p.arrival < 0:
            raise ScheduleError(f"{p.name} arrival time must be non-negative")
        if p.k not in (pm.FORWARD, pm.BACKWARD):
            raise ScheduleError(f"{p.name} wavevector index must be +1 or -1, got {p.k}")
        if p.kind != "data":
            sin_half = math.sin(p.area / 2.0)
            if abs(abs(sin_half) - 1.0) > 1e-9:
                raise ScheduleError(f"{p.name} area {p.area:g} must be an odd multiple of pi")

    d = s.pulses[0]
    if d.name != "D":
        raise ScheduleError("the data pulse D must come first")
    if not 0 < d.area <= MAX_DATA_AREA:
        raise ScheduleError(f"data pulse area must be in (0, {MAX_DATA_AREA}] rad (weak-field regime)")
    if d.duration <= 0:
        raise ScheduleError("data pulse needs a positive duration")

    for first, second in (("D", "R1"), ("R1", "R2"), ("C1", "C2"), ("R1", "C1")):
        if first in present and second in present:
            if not s.pulse(second).arrival > s.pulse(first).arrival:
                raise ScheduleError(
                    f"ordering violation: {second} at {s.pulse(second).arrival:g} must come after "
                    f"{first} at {s.pulse(first).arrival:g}"
                )

    for a, b in zip(s.pulses, s.pulses[1:]):
        if not b.arrival > a.arrival:
            raise ScheduleError(
                f"ordering violation: arrival times must strictly increase: {b.name} at {b.arrival:g} "
                f"is not after {a.name} at {a.arrival:g}"
            )
        gap = b.start - (a.arrival + DATA_CLEARANCE * a.duration if a.kind == "data" else a.end)
        if gap < 0:
            raise ScheduleError(f"{b.name} overlaps {a.name}")

    if s.kind == ProtocolKind.CDR:
        order = [n for n in names if n in ("R2", "C1", "C2")]
        want = ["R2", "C1", "C2"] if s.control_order == ControlOrder.AFTER else ["C1", "C2", "R2"]
        if order != want:
            raise ScheduleError(
                f"control order {s.control_order.value!r} requires {', '.join(want)} in that order"
            )


def _stage_k(s: PulseSchedule, name: str, prev: int | None, pre_control: int | None) -> int | None:
    p = s.pulse(name)
    if name == "D":
        return p.k
    if p.kind == "rephase":
        return None if prev is None else 2 * p.k - prev
    if name == "C1":
        return None
    return pm.echo_k_controlled(s.pulse("C1").k, p.k, pre_control)


def _stages(s: PulseSchedule) -> tuple[Stage, ...]:
    try:
        exprs = coherence_stages(s.pulses)
    except ValueError as exc:
        raise ScheduleError(str(exc)) from None
    out = []
    prev = pre_control = None
    for i, (name, expr) in enumerate(exprs):
        if name == "C1":
            pre_control = prev
        k = _stage_k(s, name, prev, pre_control)
        start = -math.inf if i == 0 else s.pulses[i].end
        out.append(Stage(name, start, math.inf, expr, k))
        prev = k
    # ledger value for the final controlled double-rephasing echo
    if s.kind == ProtocolKind.CDR:
        out[-1] = Stage(
            out[-1].after,
            out[-1].start,
            math.inf,
            out[-1].expr,
            pm.echo_k_cdr(s.pulse("C1").k, s.pulse("C2").k, s.pulse("D").k),
        )
    for i in range(len(out) - 1):
        st = out[i]
        out[i] = Stage(st.after, st.start, s.pulses[i + 1].start, st.expr, st.k)
    return tuple(out)


def _predict(s: PulseSchedule, stages: tuple[Stage, ...]) -> tuple[EchoPrediction, ...]:
    t_d = s.t_d
    found = []
    for st in stages[1:]:
        if st.expr.carrier == SPIN_CARRIER:
            continue
        t = st.expr.rephase_time(t_d)
        if st.start < t < st.end:
            found.append((t, st))
    preds = []
    final_label = "E2" if s.kind in (ProtocolKind.DOUBLE_REPHASING, ProtocolKind.CDR) else "E1"
    for i, (t, st) in enumerate(found):
        last = i == len(found) - 1 and math.isinf(st.end)
        if last:
            label = final_label
        else:
            label = "E1" if i == 0 else f"E1{chr(ord('a') + i)}"
        preds.append(EchoPrediction(label, t, st.k, st.expr.prefactor_sign))
    return tuple(preds)


def build_schedule(
    kind: "ProtocolKind | str",
    *,
    t_d: float = 5.0,
    t_r1: float | None = None,
    t_r2: float | None = None,
    t_c1: float | None = None,
    t_c2: float | None = None,
    d_area: float = 0.05,
    d_duration: float = 1.0,
    r1_area: float = math.pi,
    r2_area: float = math.pi,
    c1_area: float = math.pi,
    c2_area: float = math.pi,
    k_d: int = pm.FORWARD,
    k_r1: int | None = None,
    k_r2: int | None = None,
    k_c1: int = pm.FORWARD,
    k_c2: int = pm.BACKWARD,
    control_order: "ControlOrder | str" = ControlOrder.AFTER,
    r_duration: float = 0.0,
    c_duration: float = 0.0,
) -> PulseSchedule:
    """Assemble and validate a schedule, filling protocol defaults.

    Times are in units of the data-pulse duration by default.  Without explicit
    times the defaults are: two-pulse echo D=5, R1=12 (co-propagating R1);
    double rephasing D=5, R1=10, R2=20 (counter-propagating R pulses);
    controlled double rephasing as double rephasing plus C1 one data duration
    after R2 and C2 five later (``control_order="after"``), or C1 one data
    duration after R1, C2 three later and R2 at 24 (``"between"``);
    controlled single rephasing D=5, R1=10, C1=11, C2=16 (co-propagating R1).
    """
    kind = ProtocolKind.parse(kind)
    order = ControlOrder(control_order)
    tau = d_duration
    if kind in (ProtocolKind.TWO_PULSE_ECHO, ProtocolKind.CONTROLLED_SINGLE_REPHASING):
        k_r1 = pm.FORWARD if k_r1 is None else k_r1
    else:
        k_r1 = -k_d if k_r1 is None else k_r1
    k_r2 = k_r1 if k_r2 is None else k_r2

    times: dict[str, float] = {"D": t_d}
    if kind == ProtocolKind.TWO_PULSE_ECHO:
        times["R1"] = t_d + 7 * tau if t_r1 is None else t_r1
    elif kind == ProtocolKind.DOUBLE_REPHASING:
        times["R1"] = t_d + 5 * tau if t_r1 is None else t_r1
        times["R2"] = times["R1"] + 10 * tau if t_r2 is None else t_r2
    elif kind == ProtocolKind.CDR:
        times["R1"] = t_d + 5 * tau if t_r1 is None else t_r1
        if order == ControlOrder.AFTER:
            times["R2"] = times["R1"] + 10 * tau if t_r2 is None else t_r2
            times["C1"] = times["R2"] + tau if t_c1 is None else t_c1
            times["C2"] = times["C1"] + 5 * tau if t_c2 is None else t_c2
        else:
            times["C1"] = times["R1"] + tau if t_c1 is None else t_c1
            times["C2"] = times["C1"] + 3 * tau if t_c2 is None else t_c2
            inter = 2 * times["R1"] - t_d + (times["C2"] - times["C1"])
            times["R2"] = inter + 6 * tau if t_r2 is None else t_r2
    elif kind == ProtocolKind.CONTROLLED_SINGLE_REPHASING:
        times["R1"] = t_d + 5 * tau if t_r1 is None else t_r1
        times["C1"] = times["R1"] + tau if t_c1 is None else t_c1
        times["C2"] = times["C1"] + 5 * tau if t_c2 is None else t_c2

    layout = {
        "D": ("data", d_area, d_duration, k_d),
        "R1": ("rephase", r1_area, r_duration, k_r1),
        "R2": ("rephase", r2_area, r_duration, k_r2),
        "C1": ("control", c1_area, c_duration, k_c1),
        "C2": ("control", c2_area, c_duration, k_c2),
    }
    pulses = []
    for name, t in times.items():
        if t is None or not math.isfinite(t):
            raise ScheduleError(f"{name} arrival time is undefined")
        pkind, area, dur, k = layout[name]
        pulses.append(Pulse(name, pkind, _TRANSITION[pkind], float(area), float(t), float(dur), int(k)))
    rank = {n: i for i, n in enumerate(_canonical_order(kind, order))}
    pulses.sort(key=lambda p: rank[p.name])
    return PulseSchedule(kind, tuple(pulses), order)


def _canonical_order(kind: ProtocolKind, order: ControlOrder) -> list[str]:
    if kind == ProtocolKind.CDR and order == ControlOrder.BETWEEN:
        return ["D", "R1", "C1", "C2", "R2"]
    return [n for n in ("D", "R1", "R2", "C1", "C2") if n in _REQUIRED[kind]]
