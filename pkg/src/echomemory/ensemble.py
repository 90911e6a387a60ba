"""Maxwell-Bloch co-simulation of the inhomogeneously broadened medium.

The medium is sampled on a ``(z, delta)`` grid of three-level atoms.  The
field equation carries no time derivative, so at every instant the envelope
along ``z`` follows from the current polarization by a cumulative trapezoid
integral, forward (``+i``) or backward (``-i``), starting at the face where the
field enters.  Atoms are advanced with an integrating-factor RK4 step
(:func:`echomemory.bloch.lawson_rk4_step`) in which the detuning phase is exact.

Optical wavelengths are not resolved.  Which propagation channel an optical
coherence couples to is read from the wavevector index attached to each stage
of the schedule; a coherence whose index is silent radiates into neither
channel.  Rephasing and control pulses are classical undepleted drives, either
impulsive rotations or constant envelopes of finite duration.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import analytic
from . import bloch
from .phasematch import BACKWARD, FORWARD
from .protocol import EchoPrediction, Pulse, PulseSchedule

__all__ = [
    "MediumConfig",
    "SimGrid",
    "GridError",
    "StepBoundError",
    "HorizonError",
    "NumericalBlowupError",
    "EchoResult",
    "SimulationRun",
    "SweepResult",
    "detuning_weights",
    "center_density",
    "coupling_constant",
    "data_envelope",
    "data_energy",
    "propagate_step",
    "propagate_field",
    "run_simulation",
    "efficiency_sweep",
    "write_run_csv",
    "write_sweep_csv",
    "RUN_COLUMNS",
    "SWEEP_COLUMNS",
]

RUN_COLUMNS = ("t", "z_exit_field_re", "z_exit_field_im")
SWEEP_COLUMNS = ("alphaL", "efficiency_measured", "efficiency_closed_form")

# dt * max(1/d_duration, peak Rabi amplitude) for the ensemble integrator
ENSEMBLE_STEP_BOUND = 0.1
# data envelope is truncated outside arrival +- DATA_SUPPORT * duration
DATA_SUPPORT = 6.0
# echo detection
ECHO_FLOOR = 1e-8
ECHO_GUARD = 3.0
# largest usable fraction of the detuning-grid revival period 2 pi / spacing
REVIVAL_FRACTION = 0.9

_GAUSS_FWHM = 2.0 * math.log(2.0)  # exp(-2 ln2 t^2 / tau^2): intensity FWHM tau


class GridError(ValueError):
    pass


class StepBoundError(GridError):
    pass


class HorizonError(RuntimeError):
    pass


class NumericalBlowupError(ArithmeticError):
    pass


@dataclass(frozen=True)
class MediumConfig:
    """Optical depth parameter ``alpha`` (1/length), length, inhomogeneous width and profile.

    ``profile="flat"`` is a uniform density of half-width ``inhom_width``;
    ``"gaussian"`` has standard deviation ``inhom_width``.
    """

    alpha: float
    length: float = 1.0
    inhom_width: float = 20.0
    t2_optical: float = math.inf
    profile: str = "flat"

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise GridError("alpha must be finite and >= 0")
        if not self.length > 0:
            raise GridError("length must be > 0")
        if not (self.inhom_width > 0 and math.isfinite(self.inhom_width)):
            raise GridError("inhom_width must be finite and > 0")
        if not self.t2_optical > 0:
            raise GridError("t2_optical must be > 0")
        if self.profile not in ("flat", "gaussian"):
            raise GridError(f"unknown spectral profile {self.profile!r}")

    @property
    def optical_depth(self) -> float:
        return self.alpha * self.length

    @property
    def decay_rate(self) -> float:
        return 0.0 if math.isinf(self.t2_optical) else 1.0 / self.t2_optical

    def with_optical_depth(self, alpha_l: float) -> "MediumConfig":
        return replace(self, alpha=alpha_l / self.length)


@dataclass(frozen=True)
class SimGrid:
    """Discretization.  ``delta_span`` (in units of the width) applies to the Gaussian profile."""

    n_z: int = 81
    n_delta: int = 401
    delta_span: float = 4.0
    dt: float = 0.05
    t_end: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n_z < 2:
            raise GridError("n_z must be >= 2")
        if self.n_delta < 1 or self.n_delta % 2 == 0:
            raise GridError("n_delta must be odd so that delta = 0 is a grid point")
        if self.delta_span < 3:
            raise GridError("delta_span must be >= 3 widths")
        if not self.dt > 0:
            raise GridError("dt must be > 0")


def center_density(medium: MediumConfig) -> float:
    """Normalized spectral density at line centre."""
    if medium.profile == "flat":
        return 1.0 / (2.0 * medium.inhom_width)
    return 1.0 / (math.sqrt(2.0 * math.pi) * medium.inhom_width)


def coupling_constant(medium: MediumConfig) -> float:
    """Factor multiplying the weighted detuning sum, chosen so line-centre amplitude decays at alpha/2."""
    return medium.alpha / (2.0 * math.pi * center_density(medium))


def detuning_weights(grid: SimGrid, medium: MediumConfig) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and normalized weights for the spectral density.

    Flat profile: midpoint rule with equal weights.  Gaussian: equispaced nodes
    over ``+-delta_span`` widths weighted by the density.  A ``grid.seed``
    jitters every node except the central one by up to half a spacing.
    """
    n = grid.n_delta
    if n == 1:
        return np.zeros(1), np.ones(1)
    w_ = medium.inhom_width
    if medium.profile == "flat":
        h = 2.0 * w_ / n
        nodes = -w_ + h * (np.arange(n) + 0.5)
        weights = np.full(n, 1.0 / n)
    else:
        nodes = np.linspace(-grid.delta_span * w_, grid.delta_span * w_, n)
        h = nodes[1] - nodes[0]
        weights = np.exp(-0.5 * (nodes / w_) ** 2)
        weights /= weights.sum()
    nodes[n // 2] = 0.0
    if grid.seed is not None:
        rng = np.random.default_rng(grid.seed)
        jitter = rng.uniform(-0.5, 0.5, n) * h
        jitter[n // 2] = 0.0
        nodes = nodes + jitter
    return nodes, weights


def data_envelope(pulse: Pulse, t):
    """Gaussian data envelope of intensity FWHM ``duration`` and area ``2 * integral``."""
    tau = pulse.duration
    amp = pulse.area / (2.0 * tau * math.sqrt(math.pi / _GAUSS_FWHM))
    x = (np.asarray(t, dtype=float) - pulse.arrival) / tau
    return amp * np.exp(-_GAUSS_FWHM * x * x) * (np.abs(x) <= DATA_SUPPORT)


def data_energy(pulse: Pulse) -> float:
    """``integral |eps|^2 dt`` of the data envelope."""
    tau = pulse.duration
    amp = pulse.area / (2.0 * tau * math.sqrt(math.pi / _GAUSS_FWHM))
    return amp * amp * tau * math.sqrt(math.pi / (2.0 * _GAUSS_FWHM))


def _finite(x, what: str):
    if not np.all(np.isfinite(x)):
        raise NumericalBlowupError(f"non-finite {what}")
    return x


def propagate_step(field_in: complex, pol_from: complex, pol_to: complex, dz: float,
                   coupling: float, direction: int = FORWARD) -> complex:
    """Advance the envelope one spatial step along its propagation direction.

    ``d eps/dz = direction * i * coupling * P``; marching ``direction * dz`` the
    increment is ``i * coupling * dz * (P_from + P_to) / 2`` for either sign.
    """
    slope = direction * 1j * coupling * 0.5 * (pol_from + pol_to)
    out = field_in + slope * (direction * dz)
    return complex(_finite(out, "field (polarization blow-up)"))


def propagate_field(pol: np.ndarray, entry: complex, dz: float, coupling: float,
                    direction: int = FORWARD) -> np.ndarray:
    """Envelope on every z node given the polarization profile ``pol`` (ordered by z)."""
    p = pol if direction == FORWARD else pol[::-1]
    inc = np.empty(p.shape, dtype=complex)
    inc[0] = 0.0
    np.cumsum(0.5 * (p[:-1] + p[1:]), out=inc[1:])
    out = entry + 1j * coupling * dz * inc
    return out if direction == FORWARD else out[::-1]


@dataclass
class EchoResult:
    echo_time: float
    direction: int
    efficiency: float
    energy: float
    times: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)
    label: str | None = None
    predicted_time: float | None = None
    predicted_sign: int | None = None


@dataclass
class SimulationRun:
    schedule: PulseSchedule
    medium: MediumConfig
    grid: SimGrid
    times: np.ndarray
    forward_exit: np.ndarray
    backward_exit: np.ndarray
    input_energy: float
    echoes: list[EchoResult]
    excitation_log: list[tuple[float, str, float]] = field(default_factory=list, repr=False)

    @property
    def optical_depth(self) -> float:
        return self.medium.optical_depth

    def exit_field(self, direction: int) -> np.ndarray:
        return self.forward_exit if direction == FORWARD else self.backward_exit

    def window_energy(self, direction: int, t0: float, t1: float) -> float:
        m = (self.times >= t0) & (self.times <= t1)
        return float(np.trapezoid(np.abs(self.exit_field(direction)[m]) ** 2, self.times[m]))

    def transmission(self) -> float:
        """Energy of the data pulse leaving the medium over its input energy."""
        d = self.schedule.pulse("D")
        half = ECHO_GUARD * d.duration
        return self.window_energy(d.k, d.arrival - half, d.arrival + half) / self.input_energy

    def echo_for(self, prediction: EchoPrediction | None) -> EchoResult | None:
        if prediction is None:
            return None
        for e in self.echoes:
            if e.label == prediction.label:
                return e
        return None

    def final_efficiency(self) -> float:
        """Efficiency of the detected echo matching the final prediction, 0 if none."""
        e = self.echo_for(self.schedule.final_echo)
        return 0.0 if e is None else e.efficiency


def _step_bound(schedule: PulseSchedule, dt: float) -> None:
    d = schedule.pulse("D")
    peak = float(data_envelope(d, d.arrival))
    scale = max(1.0 / d.duration, peak)
    if dt * scale > ENSEMBLE_STEP_BOUND * (1 + 1e-12):
        raise StepBoundError(
            f"dt = {dt:g} violates the step bound dt * max(1/d_duration, peak Rabi amplitude) "
            f"<= {ENSEMBLE_STEP_BOUND} (value {dt * scale:.3g})"
        )


def _strong_amplitude(p: Pulse) -> float:
    return p.area / (2.0 * p.duration)


def _horizon(schedule: PulseSchedule, grid: SimGrid) -> float:
    tau = schedule.d_duration
    latest = max([p.end for p in schedule.pulses] + [p.time for p in schedule.predictions])
    if grid.t_end is None:
        return latest + DATA_SUPPORT * tau
    for p in schedule.predictions:
        if p.time > grid.t_end:
            raise HorizonError(
                f"predicted echo {p.label} at t = {p.time:g} is beyond the horizon t_end = {grid.t_end:g}"
            )
    return grid.t_end


def _segments(schedule: PulseSchedule, t0: float, t1: float) -> list[float]:
    d = schedule.pulse("D")
    marks = {t0, t1, d.arrival + DATA_SUPPORT * d.duration}
    for p in schedule.pulses[1:]:
        marks.update((p.start, p.end))
    return sorted(m for m in marks if t0 <= m <= t1)


def _spin_time(schedule: PulseSchedule, t0: float, t1: float) -> float:
    total = 0.0
    for st in schedule.stages:
        if st.expr.carrier == analytic.SPIN_CARRIER:
            total += max(0.0, min(st.end, t1) - max(st.start, t0))
    return total


class _Medium:
    """Vectorized atoms plus the field bookkeeping of one run."""

    def __init__(self, schedule: PulseSchedule, medium: MediumConfig, grid: SimGrid,
                 inverted: bool = False):
        self.schedule = schedule
        self.data = schedule.pulse("D")
        self.nodes, self.weights = detuning_weights(grid, medium)
        self.coupling = coupling_constant(medium)
        self.dz = medium.length / (grid.n_z - 1)
        self.gamma = medium.decay_rate
        self.rates = bloch.linear_rates(self.nodes, self.gamma)[:, None, :]
        self.y = bloch.ground_array((grid.n_z, grid.n_delta))
        if inverted:
            self.y[[bloch.P1, bloch.P2]] = self.y[[bloch.P2, bloch.P1]]
        self.channel: int | None = None
        self.strong: Pulse | None = None

    def input(self, channel: int, t: float) -> complex:
        if channel != self.data.k:
            return 0.0
        return complex(data_envelope(self.data, t))

    def fields(self, t: float, y: np.ndarray) -> tuple[np.ndarray | None, complex, complex]:
        """(field along z of the active channel, forward exit, backward exit)."""
        f_in = self.input(FORWARD, t)
        b_in = self.input(BACKWARD, t)
        if self.channel is None:
            return None, f_in, b_in
        pol = y[bloch.C12] @ self.weights
        entry = f_in if self.channel == FORWARD else b_in
        eps = propagate_field(pol, entry, self.dz, self.coupling, self.channel)
        if self.channel == FORWARD:
            return eps, eps[-1], b_in
        return eps, f_in, eps[0]

    def drive(self, t: float, y: np.ndarray) -> np.ndarray:
        eps, _, _ = self.fields(t, y)
        e = 0.0 if eps is None else eps[:, None]
        c = 0.0
        p = self.strong
        if p is not None and p.start <= t <= p.end:
            amp = _strong_amplitude(p)
            if p.transition == bloch.OPTICAL:
                e = e + amp
            else:
                c = amp
        return bloch.drive_rhs(y, e, c)

    def excitation_energy(self) -> float:
        """``coupling * integral dz sum_delta w * pop2``: energy absorbed from the field."""
        per_z = self.y[bloch.P2].real @ self.weights
        return float(self.coupling * np.trapezoid(per_z, dx=self.dz))


def run_simulation(schedule: PulseSchedule, medium: MediumConfig, grid: SimGrid,
                   inverted: bool = False) -> SimulationRun:
    """Simulate one schedule and extract every echo leaving the medium.

    ``inverted=True`` starts every atom in the excited state (a probe of the
    amplifying medium).

    Raises
    ------
    StepBoundError, GridError
        Invalid discretization.
    HorizonError
        A predicted echo lies beyond ``grid.t_end``.
    NumericalBlowupError
        Non-finite fields or atomic state.
    """
    _step_bound(schedule, grid.dt)
    d = schedule.pulse("D")
    tau = d.duration
    t0 = d.arrival - DATA_SUPPORT * tau
    t1 = _horizon(schedule, grid)
    if grid.n_delta > 1:
        nodes, _ = detuning_weights(replace(grid, seed=None), medium)
        period = 2.0 * math.pi / (nodes[1] - nodes[0])
        active = (t1 - t0) - _spin_time(schedule, t0, t1)
        if active > REVIVAL_FRACTION * period:
            raise GridError(
                f"detuning grid too coarse: revival period {period:.4g} is shorter than the "
                f"simulated dephasing time {active:.4g} / {REVIVAL_FRACTION}; increase n_delta"
            )

    m = _Medium(schedule, medium, grid, inverted)
    impulsive = [p for p in schedule.pulses[1:] if p.impulsive]
    finite = [p for p in schedule.pulses[1:] if not p.impulsive]
    times = [t0]
    fwd = [m.input(FORWARD, t0)]
    bwd = [m.input(BACKWARD, t0)]
    log = []
    marks = _segments(schedule, t0, t1)
    data_end = d.arrival + DATA_SUPPORT * tau

    for a, b in zip(marks, marks[1:]):
        for p in impulsive:
            if p.arrival == a:
                log.append((a, f"before-{p.name}", m.excitation_energy()))
                m.y = bloch.rotate(m.y, bloch.rotation_matrix(p.transition, p.area))
                log.append((a, f"after-{p.name}", m.excitation_energy()))
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        m.strong = next((p for p in finite if p.start <= mid <= p.end), None)
        k = schedule.k_at(mid)
        m.channel = None if (m.strong is not None or k is None or abs(k) != 1) else k
        if m.channel is None and m.strong is None and a >= data_end:
            m.y[bloch.C12] *= np.exp((1j * m.nodes - m.gamma) * (b - a))
            m.y[bloch.C32] *= np.exp((1j * m.nodes - m.gamma) * (b - a))
            times.append(b)
            fwd.append(0j)
            bwd.append(0j)
            continue
        h_max = grid.dt
        if m.strong is not None:
            h_max = min(h_max, ENSEMBLE_STEP_BOUND / _strong_amplitude(m.strong))
        n = max(1, int(math.ceil((b - a) / h_max - 1e-9)))
        h = (b - a) / n
        half = np.exp(m.rates * (0.5 * h))
        full = half * half
        for i in range(n):
            t = a + i * h
            m.y = bloch.lawson_rk4_step(m.y, t, h, m.drive, half, full)
            _, fe, be = m.fields(t + h, m.y)
            times.append(t + h)
            fwd.append(fe)
            bwd.append(be)
        _finite(m.y, "atomic state")
    log.append((t1, "end", m.excitation_energy()))

    times_arr = np.asarray(times)
    fwd_arr = _finite(np.asarray(fwd, dtype=complex), "forward exit field")
    bwd_arr = _finite(np.asarray(bwd, dtype=complex), "backward exit field")
    run = SimulationRun(
        schedule, medium, grid, times_arr, fwd_arr, bwd_arr, data_energy(d), [], log
    )
    run.echoes = _detect_echoes(run)
    return run


def _detect_echoes(run: SimulationRun) -> list[EchoResult]:
    """Local maxima of exit intensity away from every input pulse.

    A candidate must be the largest sample within one data duration, lie more
    than three data durations from every input pulse, and exceed 1e-8 of the
    peak input intensity.
    """
    schedule = run.schedule
    d = schedule.pulse("D")
    tau = d.duration
    floor = ECHO_FLOOR * float(data_envelope(d, d.arrival)) ** 2
    guards = [(p.arrival, ECHO_GUARD * max(tau, p.duration)) for p in schedule.pulses]
    t = run.times
    out = []
    for direction in (FORWARD, BACKWARD):
        inten = np.abs(run.exit_field(direction)) ** 2
        for i in range(1, len(t) - 1):
            if inten[i] < floor or inten[i] < inten[i - 1] or inten[i] <= inten[i + 1]:
                continue
            if any(abs(t[i] - c) <= g for c, g in guards):
                continue
            near = (t >= t[i] - tau) & (t <= t[i] + tau)
            if inten[i] < inten[near].max():
                continue
            t_peak = _refine_peak(t[i - 1:i + 2], inten[i - 1:i + 2])
            w = (t >= t_peak - ECHO_GUARD * tau) & (t <= t_peak + ECHO_GUARD * tau)
            energy = float(np.trapezoid(inten[w], t[w]))
            pred = _match(schedule, direction, t_peak, tau)
            out.append(EchoResult(
                echo_time=t_peak,
                direction=direction,
                efficiency=energy / run.input_energy,
                energy=energy,
                times=t[w].copy(),
                envelope=run.exit_field(direction)[w].copy(),
                label=None if pred is None else pred.label,
                predicted_time=None if pred is None else pred.time,
                predicted_sign=None if pred is None else pred.sign,
            ))
    out.sort(key=lambda e: e.echo_time)
    return out


def _refine_peak(ts: np.ndarray, ys: np.ndarray) -> float:
    """Vertex of the parabola through three samples (clipped to the bracket)."""
    coef = np.polyfit(ts - ts[1], ys, 2)
    if coef[0] >= 0:
        return float(ts[1])
    x = -coef[1] / (2.0 * coef[0])
    return float(ts[1] + np.clip(x, ts[0] - ts[1], ts[2] - ts[1]))


def _match(schedule: PulseSchedule, direction: int, t: float, tau: float) -> EchoPrediction | None:
    best = None
    for p in schedule.predictions:
        if p.k == direction and abs(p.time - t) <= ECHO_GUARD * tau:
            if best is None or abs(p.time - t) < abs(best.time - t):
                best = p
    return best


@dataclass
class SweepResult:
    rows: list[tuple[float, float, float]]

    @property
    def alpha_l(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def measured(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    @property
    def closed_form(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    @property
    def monotonic(self) -> bool:
        """Measured efficiency non-decreasing in alphaL."""
        order = np.argsort(self.alpha_l)
        return bool(np.all(np.diff(self.measured[order]) >= 0))

    @property
    def peak_alpha_l(self) -> float:
        return float(self.alpha_l[int(np.argmax(self.measured))])


def efficiency_sweep(schedule: PulseSchedule, medium: MediumConfig, alpha_ls: Sequence[float],
                     grid: SimGrid) -> SweepResult:
    """One simulation per optical depth; efficiency of the final predicted echo."""
    alpha_ls = list(alpha_ls)
    if not alpha_ls:
        raise ValueError("alphaL list is empty")
    rows = []
    for a in alpha_ls:
        if a < 0:
            raise ValueError("alphaL must be >= 0")
        run = run_simulation(schedule, medium.with_optical_depth(a), grid)
        rows.append((float(a), run.final_efficiency(), analytic.closed_form_efficiency(schedule, a)))
    return SweepResult(rows)


def write_run_csv(path: "str | Path", times: Iterable[float], exit_field: Iterable[complex]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_COLUMNS)
        for t, e in zip(times, exit_field):
            w.writerow((repr(float(t)), repr(float(np.real(e))), repr(float(np.imag(e)))))


def write_sweep_csv(path: "str | Path", sweep: SweepResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for a, meas, closed in sweep.rows:
            w.writerow((repr(a), repr(meas), repr(closed)))
