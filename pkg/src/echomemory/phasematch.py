"""Collinear wavevector bookkeeping.

Every wavevector is an integer multiple ``m`` of the data-pulse wavevector
along the common axis.  Input pulses carry ``m = +1`` (forward) or ``m = -1``
(backward); a rephased coherence radiates only if its index is again a
propagating mode, ``|m| == 1``.
"""
from __future__ import annotations

__all__ = [
    "FORWARD",
    "BACKWARD",
    "echo_k_two_pulse",
    "echo_k_dr",
    "echo_k_cdr",
    "echo_k_controlled",
    "is_silent",
    "direction",
    "direction_name",
    "format_k",
]

FORWARD = 1
BACKWARD = -1


def _check(*ms: int) -> None:
    for m in ms:
        if m not in (FORWARD, BACKWARD):
            raise ValueError(f"input pulse wavevector index must be +1 or -1, got {m!r}")


def echo_k_two_pulse(m_r1: int, m_d: int) -> int:
    """Index of the two-pulse echo, ``2 m_R1 - m_D``."""
    _check(m_r1, m_d)
    return 2 * m_r1 - m_d


def echo_k_dr(m_r1: int, m_r2: int, m_d: int) -> int:
    """Index of the doubly rephased echo, ``2 m_R2 - (2 m_R1 - m_D)``."""
    _check(m_r1, m_r2, m_d)
    return 2 * m_r2 - 2 * m_r1 + m_d


def echo_k_controlled(m_c1: int, m_c2: int, m_before: int) -> int:
    """Index after a control pair acting on a coherence of index ``m_before``."""
    _check(m_c1, m_c2)
    return m_c1 + m_c2 - m_before


def echo_k_cdr(m_c1: int, m_c2: int, m_d: int) -> int:
    """Index of the controlled double-rephasing echo, ``m_C1 + m_C2 - m_D``.

    The rephasing pulses do not enter.
    """
    _check(m_d)
    return echo_k_controlled(m_c1, m_c2, m_d)


def is_silent(m: int) -> bool:
    return abs(m) != 1


def direction(m: int) -> int | None:
    """+1 / -1 for a radiating index, ``None`` for a silent one."""
    return None if is_silent(m) else m


def direction_name(m: int) -> str:
    if is_silent(m):
        return "silent"
    return "forward" if m > 0 else "backward"


def format_k(m: int) -> str:
    sign = "−" if m < 0 else "+"
    return f"{sign}{abs(m)}·k_D"
