"""Time-ordered evolution of the internal state along a centre-of-mass path.

The path enters only through a coupling acting on the internal Hilbert
space. Its primary form is a train of instantaneous kicks separated by free
flight under the internal Hamiltonian; a continuous coupling is handled by
symmetric operator splitting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hilbert import (
    DimensionMismatchError,
    HermitianOperator,
    Spectrum,
    StateVector,
    free_propagator,
    kick_operator,
    overlap,
)

__all__ = [
    "ScheduleError",
    "KickEvent",
    "PathSchedule",
    "ContinuousCoupling",
    "FidelityTrace",
    "evolve_schedule",
    "echo_overlap",
    "fidelity_trace",
    "periodic_schedule",
    "trotter_evolve",
    "interaction_picture_overlap",
    "fit_decay_rate",
]


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KickEvent:
    time: float
    generator: HermitianOperator


@dataclass(frozen=True, eq=False)
class PathSchedule:
    """Free flight of ``total_duration`` interrupted by kicks at interior times."""

    total_duration: float
    kicks: tuple = ()

    def __post_init__(self):
        kicks = tuple(self.kicks)
        object.__setattr__(self, "kicks", kicks)
        tau = float(self.total_duration)
        if not np.isfinite(tau) or tau <= 0:
            raise ScheduleError(f"total duration must be > 0, got {self.total_duration!r}")
        times = [k.time for k in kicks]
        for t in times:
            if not 0 < t < tau:
                raise ScheduleError(f"kick time {t!r} not inside (0, {tau!r})")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ScheduleError(f"kick times must be strictly increasing: {times}")
        dims = {k.generator.dim for k in kicks}
        if len(dims) > 1:
            raise DimensionMismatchError(f"kick generators have mixed dims {sorted(dims)}")

    @property
    def kick_times(self) -> list[float]:
        return [k.time for k in self.kicks]

    @property
    def segments(self) -> list[float]:
        """Free-flight durations dt_1 .. dt_{N+1}."""
        edges = [0.0, *self.kick_times, float(self.total_duration)]
        return [b - a for a, b in zip(edges, edges[1:])]

    def structurally_equal(self, other: "PathSchedule") -> bool:
        if self.total_duration != other.total_duration or len(self.kicks) != len(other.kicks):
            return False
        return all(
            a.time == b.time and np.array_equal(a.generator.matrix, b.generator.matrix)
            for a, b in zip(self.kicks, other.kicks)
        )


@dataclass(frozen=True, eq=False)
class ContinuousCoupling:
    """Time-dependent coupling t -> Gamma(t) acting for ``duration``."""

    sampler: Callable[[float], HermitianOperator]
    duration: float


@dataclass(frozen=True, eq=False)
class FidelityTrace:
    times: np.ndarray
    values: np.ndarray
    moduli: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        object.__setattr__(self, "moduli", np.abs(self.values))


def _check(chi0: StateVector, s: Spectrum, sched: PathSchedule) -> None:
    if chi0.dim != s.dim:
        raise DimensionMismatchError(f"state dim {chi0.dim} vs spectrum dim {s.dim}")
    for k in sched.kicks:
        if k.generator.dim != s.dim:
            raise DimensionMismatchError(f"kick dim {k.generator.dim} vs spectrum dim {s.dim}")


def _phases(s: Spectrum, dt: float) -> np.ndarray:
    return np.exp(-1j * s.eigenvalues * dt)


def evolve_schedule(chi0: StateVector, s: Spectrum, sched: PathSchedule) -> StateVector:
    """U_{N+1} K_N ... U_2 K_1 U_1 chi0."""
    _check(chi0, s, sched)
    v = s.eigenvectors
    # carry the state in the internal eigenbasis so free flights are diagonal
    c = v.conj().T @ chi0.amplitudes
    segments = sched.segments
    for dt, kick in zip(segments, sched.kicks):
        c = _phases(s, dt) * c
        c = v.conj().T @ (kick_operator(kick.generator).matrix @ (v @ c))
    c = _phases(s, segments[-1]) * c
    return StateVector(v @ c)


def echo_overlap(chi0: StateVector, s: Spectrum, sched: PathSchedule) -> complex:
    """<chi0| exp(+i H tau) T exp(-i int (H + Gamma)) |chi0>."""
    back = free_propagator(s, -float(sched.total_duration))
    return overlap(chi0, back @ evolve_schedule(chi0, s, sched))


def interaction_picture_overlap(chi0: StateVector, s: Spectrum, sched: PathSchedule) -> complex:
    """<chi0| K~_N ... K~_1 |chi0> with K~_n = U(-tau_n) K_n U(tau_n)."""
    _check(chi0, s, sched)
    phi = chi0.amplitudes
    for k in sched.kicks:
        kt = free_propagator(s, -k.time) @ kick_operator(k.generator) @ free_propagator(s, k.time)
        phi = kt.matrix @ phi
    return complex(np.vdot(chi0.amplitudes, phi))


def periodic_schedule(duration: float, period: float, generator: HermitianOperator) -> PathSchedule:
    """Kicks at period, 2*period, ... strictly before ``duration``."""
    if not period > 0:
        raise ScheduleError(f"kick period must be > 0, got {period!r}")
    n = int(np.ceil(duration / period)) - 1
    times = [period * (j + 1) for j in range(max(n, 0))]
    times = [t for t in times if t < duration]
    return PathSchedule(duration, tuple(KickEvent(t, generator) for t in times))


def fidelity_trace(
    chi0: StateVector | Sequence[StateVector],
    s: Spectrum,
    kick: HermitianOperator,
    times: Sequence[float],
    period: float = 1.0,
) -> FidelityTrace:
    """Echo overlap under periodic kicks as a function of the path duration.

    Kicks act at period, 2*period, ... strictly before each duration t. If
    ``chi0`` is a sequence of states, the complex echoes are averaged over
    them (an equal-weight ensemble of pure initial states).

    The echo at duration t depends only on the kicks before t, since the
    trailing free flight is undone by the backward evolution, so the kick
    products are accumulated once and shared by all times.
    """
    states = [chi0] if isinstance(chi0, StateVector) else list(chi0)
    if not states:
        raise ValueError("need at least one initial state")
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("fidelity trace needs at least two times")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be non-negative and ascending")
    if not period > 0:
        raise ScheduleError(f"kick period must be > 0, got {period!r}")
    if kick.dim != s.dim or any(c.dim != s.dim for c in states):
        raise DimensionMismatchError("state, spectrum and kick dims differ")

    v = s.eigenvectors
    k_eig = v.conj().T @ kick_operator(kick).matrix @ v
    step = _phases(s, period)[:, None]
    c0 = v.conj().T @ np.column_stack([c.amplitudes for c in states])
    # number of kicks strictly inside (0, t)
    counts = np.maximum(np.ceil(times / period - 1e-12).astype(int) - 1, 0)
    echoes = np.empty(counts.max() + 1, dtype=complex)
    echoes[0] = 1.0
    c = c0
    for n in range(1, echoes.size):
        c = k_eig @ (step * c)
        # undo the n periods of free flight preceding this kick
        back = np.exp(1j * s.eigenvalues * (n * period))[:, None]
        echoes[n] = np.mean(np.sum(c0.conj() * back * c, axis=0))
    return FidelityTrace(times, echoes[counts])


def trotter_evolve(
    chi0: StateVector, s: Spectrum, coupling: ContinuousCoupling, dt: float
) -> StateVector:
    """Symmetric split-step evolution under H + Gamma(t).

    Each step applies exp(-i H h/2) exp(-i Gamma(t_mid) h) exp(-i H h/2), with
    h = duration / ceil(duration / dt) <= dt and Gamma sampled at the step
    midpoint. Global error is O(h**2).
    """
    dt = float(dt)
    duration = float(coupling.duration)
    if not dt > 0:
        raise ValueError(f"step must be > 0, got {dt!r}")
    if dt > duration:
        raise ValueError(f"step {dt!r} exceeds duration {duration!r}")
    nsteps = int(np.ceil(duration / dt - 1e-12))
    h = duration / nsteps
    v = s.eigenvectors
    half = _phases(s, h / 2)
    c = v.conj().T @ chi0.amplitudes
    for j in range(nsteps):
        gamma = coupling.sampler((j + 0.5) * h)
        if gamma.dim != s.dim:
            raise DimensionMismatchError(f"coupling dim {gamma.dim} vs spectrum dim {s.dim}")
        g = v.conj().T @ kick_operator(gamma * h).matrix @ v
        c = half * (g @ (half * c))
    return StateVector(v @ c)


def fit_decay_rate(times, moduli, lo: float = 0.1, hi: float = 0.9) -> dict:
    """Least-squares rate of log-modulus decay.

    The window runs from the first point at or below ``hi`` up to the last
    point before the modulus first falls below ``lo``. Returns the rate
    (negative slope), window endpoints and the number of fitted points.
    A trace that never leaves the window's upper edge has rate 0.
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(moduli, dtype=float)
    below = np.nonzero(m < lo)[0]
    stop = below[0] if below.size else m.size
    start_idx = np.nonzero(m[:stop] <= hi)[0]
    if start_idx.size < 2:
        return {"rate": 0.0, "window_start": None, "window_end": None, "points": int(start_idx.size)}
    idx = np.arange(start_idx[0], stop)
    idx = idx[(m[idx] >= lo) & (m[idx] <= hi)]
    if idx.size < 2:
        return {"rate": 0.0, "window_start": None, "window_end": None, "points": int(idx.size)}
    slope, _ = np.polyfit(t[idx], np.log(m[idx]), 1)
    return {
        "rate": float(-slope),
        "window_start": float(t[idx[0]]),
        "window_end": float(t[idx[-1]]),
        "points": int(idx.size),
    }
