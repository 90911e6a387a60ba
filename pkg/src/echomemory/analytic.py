"""Closed-form results for the echo protocols.

The stage algebra tracks only the data-sourced term of the optical coherence,

    sigma_12(t, delta) = sign * i * exp(-i delta (offset - t)) * F(delta),

where ``F`` is the spectrum of the data envelope, ``int eps(s) exp(-i delta s) ds``,
or its conjugate after an odd number of rephasing pulses.  Terms sourced by the
rephasing fields themselves are dropped.  A positive sign is absorptive, a
negative sign emissive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .bloch import CONTROL, OPTICAL

if TYPE_CHECKING:
    from .protocol import Pulse, PulseSchedule

__all__ = [
    "CoherenceExpression",
    "UnknownStageError",
    "coherence_stages",
    "coherence_after",
    "echo_time",
    "two_pulse_echo_time",
    "cdr_echo_time",
    "efficiency_backward",
    "efficiency_forward",
    "two_pulse_echo_gain",
    "beer_transmission",
    "closed_form_efficiency",
]

OPTICAL_CARRIER = "optical"
SPIN_CARRIER = "spin"


class UnknownStageError(ValueError):
    pass


@dataclass(frozen=True)
class CoherenceExpression:
    """Sign and accumulated phase offset of the data-sourced coherence term.

    For ``carrier == "spin"`` the optical coherence is zero; the spin coherence
    holds ``i * sign * (optical expression frozen at locked_at)``.
    """

    prefactor_sign: int
    phase_offset: float
    conjugated: bool = False
    carrier: str = OPTICAL_CARRIER
    locked_at: float | None = None

    @property
    def emissive(self) -> bool:
        return self.prefactor_sign < 0

    def rephase_time(self, t_d: float) -> float:
        """Time at which every detuning class is back in phase."""
        return self.phase_offset - t_d if self.conjugated else self.phase_offset + t_d


def _full_turn_sign(area: float, what: str) -> int:
    s = math.sin(area / 2.0)
    if abs(abs(s) - 1.0) > 1e-9:
        raise ValueError(f"{what} area {area:g} is not an odd multiple of pi")
    return 1 if s > 0 else -1


def _step(expr: CoherenceExpression, pulse: "Pulse") -> CoherenceExpression:
    t = pulse.arrival
    if pulse.transition == OPTICAL:
        if expr.carrier != OPTICAL_CARRIER:
            raise ValueError(f"{pulse.name} acts on |1>-|2> while the coherence is stored in |1>-|3>")
        _full_turn_sign(pulse.area, f"{pulse.name}")
        return CoherenceExpression(
            -expr.prefactor_sign, 2.0 * t - expr.phase_offset, not expr.conjugated
        )
    if pulse.transition != CONTROL:
        raise ValueError(f"unknown transition {pulse.transition!r}")
    s = _full_turn_sign(pulse.area, f"{pulse.name}")
    if expr.carrier == OPTICAL_CARRIER:
        return replace(
            expr, prefactor_sign=expr.prefactor_sign * s, carrier=SPIN_CARRIER, locked_at=t
        )
    return CoherenceExpression(
        -s * expr.prefactor_sign,
        expr.phase_offset + (t - expr.locked_at),
        expr.conjugated,
    )


def coherence_stages(pulses: Iterable["Pulse"]) -> list[tuple[str, CoherenceExpression]]:
    """Expression after every pulse of a time-ordered sequence starting with the data pulse."""
    pulses = list(pulses)
    if not pulses or pulses[0].kind != "data":
        raise ValueError("sequence must start with the data pulse")
    expr = CoherenceExpression(1, 0.0)
    out = [(pulses[0].name, expr)]
    for p in pulses[1:]:
        expr = _step(expr, p)
        out.append((p.name, expr))
    return out


def coherence_after(schedule: "PulseSchedule", stage: str) -> CoherenceExpression:
    """Expression right after the named pulse, e.g. ``"after-R2"``."""
    name = stage[len("after-"):] if stage.startswith("after-") else None
    for pulse_name, expr in coherence_stages(schedule.pulses):
        if pulse_name == name:
            return expr
    raise UnknownStageError(f"unknown stage marker {stage!r} for this schedule")


def echo_time(schedule: "PulseSchedule") -> float:
    """Emission time of the final echo of a schedule.

    Coincides with :func:`cdr_echo_time` when the control pair follows the
    second rephasing pulse; with the pair stored between the two rephasing
    pulses the storage interval enters with the opposite sign.
    """
    final = schedule.final_echo
    if final is None:
        raise ValueError("schedule has no rephased echo")
    return final.time


def two_pulse_echo_time(t_d: float, t_r1: float) -> float:
    return 2.0 * t_r1 - t_d


def cdr_echo_time(t_d: float, t_r1: float, t_r2: float, t_c1: float, t_c2: float) -> float:
    return t_c2 - t_c1 + 2.0 * (t_r2 - t_r1) + t_d


def _nonneg(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError(f"{name} must be non-negative")
    return x


def _out(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def efficiency_backward(alpha_l):
    """Backward retrieval efficiency ``(1 - exp(-aL))**2``."""
    a = _nonneg(alpha_l, "alphaL")
    return _out(np.expm1(-a) ** 2)


def efficiency_forward(alpha_l):
    """Forward retrieval efficiency ``aL**2 exp(-aL)``, maximal (4/e^2) at aL = 2."""
    a = _nonneg(alpha_l, "alphaL")
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(a), 0.0, a * a * np.exp(-a))
    return _out(out)


def two_pulse_echo_gain(alpha_z):
    """Echo-to-input energy ratio of a two-pulse echo in the inverted medium."""
    a = _nonneg(alpha_z, "alphaZ")
    return _out(4.0 * np.sinh(a / 2.0) ** 2)


def beer_transmission(alpha_z, energy: bool = False):
    """Amplitude transmission ``exp(-az/2)``; energy transmission ``exp(-az)`` with ``energy=True``."""
    a = _nonneg(alpha_z, "alphaZ")
    return _out(np.exp(-a) if energy else np.exp(-a / 2.0))


def closed_form_efficiency(schedule: "PulseSchedule", alpha_l: float) -> float:
    """Efficiency of the final echo predicted by the stage algebra.

    Silent and absorptive echoes are predicted not to radiate (0).  ``nan``
    where no closed form exists (controlled single rephasing, which retrieves
    into an inverted medium).
    """
    final = schedule.final_echo
    if final is None or not final.radiated:
        return 0.0
    kind = schedule.kind.value
    if kind == "2pe":
        if final.k != schedule.pulse("D").k:
            return math.nan
        return two_pulse_echo_gain(alpha_l)
    if kind == "cdr":
        if final.direction == -schedule.pulse("D").k:
            return efficiency_backward(alpha_l)
        return efficiency_forward(alpha_l)
    return math.nan
