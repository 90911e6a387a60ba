"""Single-atom dynamics of a Lambda-type three-level atom.

Levels: |1> ground, |2> excited, |3> spin (storage) state.  The optical field
couples |1>-|2>, the control field couples |2>-|3>.

The six stored quantities are the populations ``pop1, pop2, pop3`` and the
upper-triangle coherences ``coh12, coh13, coh32``.  ``coh12`` follows the sign
convention sigma_12 = -rho_12, so that a weak resonant drive produces a coherence
of ``+i * integral(field dt)``.

All of them are the entries of a Hermitian 3x3 matrix ``S`` obeying

    dS/dt = i [S, M],   M = [[0, e, 0], [e*, delta, c*], [0, c, 0]]

with ``e`` the optical envelope and ``c`` the control envelope (both in units of
Rabi amplitude, rad/time).  A pulse of area ``theta = 2 * integral(|field| dt)``
therefore acts as the unitary ``exp(-i theta/2 X)`` on its two-level pair and a
``theta = pi`` optical pulse swaps |1> and |2>.

Two representations are provided: the immutable :class:`AtomState` for single
atoms, and plain complex arrays of shape ``(6, ...)`` (component axis first) for
vectorized ensembles.  Every public single-atom function is a thin wrapper over
the array form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "AtomState",
    "StepSizeError",
    "STEP_BOUND",
    "OPTICAL",
    "CONTROL",
    "as_array",
    "from_array",
    "ground_array",
    "state_matrix",
    "matrix_state",
    "rotation_matrix",
    "rotate",
    "free_evolve",
    "apply_optical_rotation",
    "apply_control_rotation",
    "drive_rhs",
    "bloch_rhs",
    "linear_rates",
    "integrate_bloch",
    "integrate_pulse",
    "lawson_rk4_step",
]

OPTICAL = "opt12"
CONTROL = "ctl23"

# max(|delta|, |field|) * dt for the plain RK4 step
STEP_BOUND = 0.1

# component order of the array representation
P1, P2, P3, C12, C13, C32 = range(6)


class StepSizeError(ValueError):
    """Raised when an integration step violates the integrator bound."""


@dataclass(frozen=True)
class AtomState:
    """Density-matrix snapshot of one atom at one detuning and position."""

    pop1: float = 1.0
    pop2: float = 0.0
    pop3: float = 0.0
    coh12: complex = 0j
    coh13: complex = 0j
    coh32: complex = 0j

    @classmethod
    def ground(cls) -> "AtomState":
        return cls()

    @property
    def trace(self) -> float:
        return self.pop1 + self.pop2 + self.pop3

    def matrix(self) -> np.ndarray:
        return state_matrix(as_array(self))

    def isclose(self, other: "AtomState", atol: float = 1e-9) -> bool:
        return bool(np.allclose(as_array(self), as_array(other), rtol=0.0, atol=atol))


def as_array(state: AtomState) -> np.ndarray:
    return np.array(
        [state.pop1, state.pop2, state.pop3, state.coh12, state.coh13, state.coh32],
        dtype=complex,
    )


def from_array(y: np.ndarray) -> AtomState:
    y = np.asarray(y)
    return AtomState(
        float(y[P1].real),
        float(y[P2].real),
        float(y[P3].real),
        complex(y[C12]),
        complex(y[C13]),
        complex(y[C32]),
    )


def ground_array(shape: tuple[int, ...] = ()) -> np.ndarray:
    y = np.zeros((6,) + tuple(shape), dtype=complex)
    y[P1] = 1.0
    return y


def state_matrix(y: np.ndarray) -> np.ndarray:
    """Hermitian matrix S of shape ``(..., 3, 3)`` built from the component array."""
    y = np.asarray(y, dtype=complex)
    s = np.zeros(y.shape[1:] + (3, 3), dtype=complex)
    s[..., 0, 0] = y[P1]
    s[..., 1, 1] = y[P2]
    s[..., 2, 2] = y[P3]
    s[..., 0, 1] = y[C12]
    s[..., 1, 0] = np.conj(y[C12])
    s[..., 0, 2] = y[C13]
    s[..., 2, 0] = np.conj(y[C13])
    s[..., 2, 1] = y[C32]
    s[..., 1, 2] = np.conj(y[C32])
    return s


def matrix_state(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s)
    y = np.empty((6,) + s.shape[:-2], dtype=complex)
    y[P1] = s[..., 0, 0].real
    y[P2] = s[..., 1, 1].real
    y[P3] = s[..., 2, 2].real
    y[C12] = s[..., 0, 1]
    y[C13] = s[..., 0, 2]
    y[C32] = s[..., 2, 1]
    return y


def rotation_matrix(transition: str, area: float) -> np.ndarray:
    """Unitary of a resonant, real-envelope pulse of the given area.

    ``exp(-i area/2 X)`` on the driven pair.  The control rotation is exactly
    4*pi periodic; a 2*pi control pulse is ``-1`` on the {|2>, |3>} block.
    """
    c, s = np.cos(area / 2.0), np.sin(area / 2.0)
    u = np.eye(3, dtype=complex)
    if transition == OPTICAL:
        i, j = 0, 1
    elif transition == CONTROL:
        i, j = 1, 2
    else:
        raise ValueError(f"unknown transition {transition!r}")
    u[i, i] = u[j, j] = c
    u[i, j] = u[j, i] = -1j * s
    return u


def rotate(y: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply ``S -> U S U^dagger`` to every atom of a component array."""
    s = state_matrix(y)
    s = np.einsum("ij,...jk,lk->...il", u, s, np.conj(u))
    return matrix_state(s)


def free_evolve(state: AtomState, delta: float, dt: float, gamma: float = 0.0) -> AtomState:
    """Field-free evolution for a time ``dt``.

    The optical coherences pick up ``exp(i delta dt)`` (and decay at ``gamma``);
    the spin coherence and the populations are untouched.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    f = np.exp((1j * delta - gamma) * dt)
    return AtomState(
        state.pop1, state.pop2, state.pop3, state.coh12 * f, state.coh13, state.coh32 * f
    )


def apply_optical_rotation(state: AtomState, area: float) -> AtomState:
    """Impulsive rotation on |1>-|2>; ``area = pi`` swaps pop1/pop2 and conjugates coh12."""
    return from_array(rotate(as_array(state), rotation_matrix(OPTICAL, area)))


def apply_control_rotation(state: AtomState, area: float) -> AtomState:
    """Impulsive rotation on |2>-|3>.

    ``coh12 -> cos(a/2) coh12 + i sin(a/2) coh13`` and symmetrically for coh13, so
    a pi pulse stores the optical coherence as ``i * coh12`` in the spin coherence.
    """
    return from_array(rotate(as_array(state), rotation_matrix(CONTROL, area)))


def drive_rhs(y: np.ndarray, e, c=0.0) -> np.ndarray:
    """Field-coupling part of the Bloch equations (everything except detuning and decay).

    ``e`` and ``c`` broadcast against ``y[0]``.
    """
    s11, s22, s33, s12, s13, s32 = y
    ec = np.conj(e)
    s21 = np.conj(s12)
    d = np.empty_like(y)
    d[P1] = 1j * (s12 * ec - e * s21)
    d[C12] = 1j * e * (s11 - s22)
    d[P3] = 0.0
    if np.any(c):
        cc = np.conj(c)
        s23 = np.conj(s32)
        d[P2] = 1j * (s21 * e + s23 * c - ec * s12 - cc * s32)
        d[P3] = 1j * (s32 * cc - c * s23)
        d[C12] += 1j * c * s13
        d[C13] = 1j * (s12 * cc - e * s23)
        d[C32] = 1j * (e * np.conj(s13) + c * (s33 - s22))
    else:
        d[P2] = -d[P1]
        d[C13] = -1j * e * np.conj(s32)
        d[C32] = 1j * e * np.conj(s13)
    return d


def linear_rates(delta, gamma: float = 0.0) -> np.ndarray:
    """Diagonal rates of the field-free part, shape ``(6,) + shape(delta)``."""
    delta = np.asarray(delta, dtype=float)
    r = np.zeros((6,) + delta.shape, dtype=complex)
    r[C12] = 1j * delta - gamma
    r[C32] = 1j * delta - gamma
    return r


def bloch_rhs(y: np.ndarray, e, c, delta, gamma: float = 0.0) -> np.ndarray:
    return drive_rhs(y, e, c) + linear_rates(delta, gamma) * y


def _check_bound(e, c, delta, dt) -> None:
    scale = max(abs(delta), abs(e), abs(c))
    if scale * dt > STEP_BOUND * (1 + 1e-12):
        raise StepSizeError(
            f"step bound violated: max(|delta|, |field|) * dt = {scale * dt:.4g} > {STEP_BOUND}"
        )


def integrate_bloch(
    state: AtomState,
    optical_field: complex,
    control_field: complex,
    delta: float,
    dt: float,
    gamma: float = 0.0,
) -> AtomState:
    """One classical RK4 step of the full three-level equations with constant fields.

    Raises
    ------
    StepSizeError
        If ``max(|delta|, |field|) * dt`` exceeds :data:`STEP_BOUND`, or if the
        step changes the trace by more than 1e-6.
    """
    _check_bound(optical_field, control_field, delta, dt)
    y = as_array(state)
    f = lambda v: bloch_rhs(v, optical_field, control_field, delta, gamma)  # noqa: E731
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    out = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs((out[P1] + out[P2] + out[P3] - y[P1] - y[P2] - y[P3]).real)
    if drift > 1e-6:
        raise StepSizeError(f"trace drifted by {drift:.3g} in one step")
    return from_array(out)


def integrate_pulse(
    state: AtomState,
    optical_field: complex,
    control_field: complex,
    delta: float,
    duration: float,
    max_step: float | None = None,
    gamma: float = 0.0,
) -> AtomState:
    """Integrate a constant-envelope interval with equal RK4 steps no longer than ``max_step``."""
    scale = max(abs(delta), abs(optical_field), abs(control_field), 1e-300)
    h_max = STEP_BOUND / scale if max_step is None else min(max_step, STEP_BOUND / scale)
    n = max(1, int(np.ceil(duration / h_max - 1e-12)))
    h = duration / n
    for _ in range(n):
        state = integrate_bloch(state, optical_field, control_field, delta, h, gamma)
    return state


def lawson_rk4_step(
    y: np.ndarray,
    t: float,
    h: float,
    drive: Callable[[float, np.ndarray], np.ndarray],
    half: np.ndarray,
    full: np.ndarray,
) -> np.ndarray:
    """Integrating-factor (Lawson) RK4 step.

    The diagonal linear part enters only through ``half = exp(L h/2)`` and
    ``full = exp(L h)``, so free precession is exact for any ``|delta| h`` and
    the accuracy is set by the field coupling alone.
    """
    k1 = drive(t, y)
    a = half * (y + 0.5 * h * k1)
    k2 = drive(t + 0.5 * h, a)
    b = half * y + 0.5 * h * k2
    k3 = drive(t + 0.5 * h, b)
    c = full * y + h * half * k3
    k4 = drive(t + h, c)
    return full * y + (h / 6.0) * (full * k1 + 2.0 * half * (k2 + k3) + k4)
