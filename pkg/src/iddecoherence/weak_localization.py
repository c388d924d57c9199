"""Clockwise / counter-clockwise scattering loops and their internal overlap.

A closed loop of N instantaneous scatterers is traversed in both directions.
The counter-clockwise path sees the same free flights and kicks in reverse
order, so the two internal states agree only when the operator string is a
palindrome or all factors commute. ``wl_weight`` (the real part of the
overlap) is used as the weak-localization proxy.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .hilbert import HermitianOperator, Spectrum, StateVector, eigendecompose, overlap
from .models import InitialStateSpec, KickSpec, ModelSpec, build_hamiltonian, build_kick, initial_state
from .propagation import KickEvent, PathSchedule, ScheduleError, evolve_schedule

WORKERS_ENV = "IDDECOH_WORKERS"


@dataclass(frozen=True, eq=False)
class LoopSpec:
    total_duration: float
    scatterer_times: tuple = ()
    generators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "scatterer_times", tuple(float(t) for t in self.scatterer_times))
        object.__setattr__(self, "generators", tuple(self.generators))
        if len(self.scatterer_times) != len(self.generators):
            raise ScheduleError("need exactly one kick generator per scatterer")
        # PathSchedule enforces 0 < t_1 < ... < t_N < tau
        PathSchedule(self.total_duration, self._events(self.scatterer_times, self.generators))

    @staticmethod
    def _events(times, generators):
        return tuple(KickEvent(t, f) for t, f in zip(times, generators))

    @property
    def n_scatterers(self) -> int:
        return len(self.scatterer_times)


@dataclass(frozen=True, eq=False)
class LoopOverlapResult:
    overlap: complex
    clockwise_state: StateVector
    counter_state: StateVector

    @property
    def wl_weight(self) -> float:
        return self.overlap.real


def loop_schedules(spec: LoopSpec) -> tuple[PathSchedule, PathSchedule]:
    """Clockwise schedule and its exact time reversal."""
    tau = float(spec.total_duration)
    cw = PathSchedule(tau, LoopSpec._events(spec.scatterer_times, spec.generators))
    # counter-clockwise kick n happens at tau - t_{N+1-n}
    times = [tau - t for t in reversed(spec.scatterer_times)]
    ccw = PathSchedule(tau, LoopSpec._events(times, spec.generators[::-1]))
    return cw, ccw


def loop_overlap(chi0: StateVector, s: Spectrum, spec: LoopSpec) -> LoopOverlapResult:
    cw, ccw = loop_schedules(spec)
    chi1 = evolve_schedule(chi0, s, cw)
    chi2 = evolve_schedule(chi0, s, ccw)
    return LoopOverlapResult(overlap(chi1, chi2), chi1, chi2)


@dataclass(frozen=True)
class EnsembleParams:
    """Disorder ensemble of loops sharing one internal Hamiltonian.

    Each sample draws N scatterer times as uniform order statistics in
    (0, duration) and N independent kick generators with the given strength
    and basis.
    """

    model: ModelSpec
    n_scatterers: int
    strength: float
    basis: str = "rotated"
    duration: float = 1.0
    initial: InitialStateSpec = InitialStateSpec()
    bins: int = 20

    def __post_init__(self):
        if self.n_scatterers < 0:
            raise ValueError("n_scatterers must be >= 0")
        if not self.duration > 0:
            raise ValueError("loop duration must be > 0")
        # validates strength and basis
        KickSpec(self.strength, self.basis)


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    weights: np.ndarray
    overlaps: np.ndarray
    mean: float
    std: float
    histogram: tuple

    @property
    def n_samples(self) -> int:
        return self.weights.size


def sample_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed for sample ``index``; depends only on (master_seed, index)."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))


def worker_count(default: Optional[int] = None) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {raw!r}")
        return n
    return default or os.cpu_count() or 1


def _draw_loop(params: EnsembleParams, s: Spectrum, seq: np.random.SeedSequence) -> LoopSpec:
    rng = np.random.default_rng(seq)
    n = params.n_scatterers
    while True:
        times = np.sort(rng.uniform(0.0, params.duration, size=n))
        if n == 0 or (times[0] > 0 and np.all(np.diff(times) > 0) and times[-1] < params.duration):
            break
    kick_seeds = rng.integers(0, 2**63 - 1, size=(n, 2))
    gens = tuple(
        build_kick(KickSpec(params.strength, params.basis, int(a), int(b)), s) for a, b in kick_seeds
    )
    return LoopSpec(params.duration, tuple(times.tolist()), gens)


def ensemble_overlap(
    params: EnsembleParams, n_samples: int, seed: int, workers: Optional[int] = None
) -> EnsembleStats:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    s = eigendecompose(build_hamiltonian(params.model))
    chi0 = initial_state(params.initial, s)

    def one(i: int) -> complex:
        return loop_overlap(chi0, s, _draw_loop(params, s, sample_seed(seed, i))).overlap

    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            overlaps = np.array(list(pool.map(one, range(n_samples))), dtype=complex)
    else:
        overlaps = np.array([one(i) for i in range(n_samples)], dtype=complex)
    w = overlaps.real
    counts, edges = np.histogram(w, bins=params.bins, range=(-1.0, 1.0))
    return EnsembleStats(w, overlaps, float(w.mean()), float(w.std()), (counts, edges))


def evenly_spaced_loop(
    duration: float, generators: Sequence[HermitianOperator]
) -> LoopSpec:
    """Scatterers at duration * k / (N + 1); N = 1 puts the kick at the midpoint."""
    n = len(generators)
    times = tuple(duration * (k + 1) / (n + 1) for k in range(n))
    return LoopSpec(duration, times, tuple(generators))
