"""Two-branch interferometer scenarios, visibility and screen fringes.

Branch 1 and branch 2 start from the same internal state. The internal
overlap of their final states multiplies the centre-of-mass interference
term, so its modulus is the fringe visibility.

A delay lengthens one centre-of-mass path but does not change how long the
internal dynamics runs before the two partial waves meet: both branches are
compared at their own arrival, carrying the internal state they had when
they left the last interaction region plus the same free evolution. The
delay segment is therefore recorded on the branch schedule but excluded from
the internal clock.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hilbert import HermitianOperator, Spectrum, StateVector, overlap
from .propagation import KickEvent, PathSchedule, evolve_schedule

SCENARIO_KINDS = (
    "delay-only",
    "symmetric-nonlinear",
    "delay-after-nonlinear",
    "delay-before-nonlinear",
    "asymmetric-nonlinear",
)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Scenario:
    kind: str
    branch1: PathSchedule
    branch2: PathSchedule
    delay: float = 0.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        if self.delay < 0:
            raise ScenarioError(f"delay must be >= 0, got {self.delay!r}")
        if self.kind == "symmetric-nonlinear" and not self.branch1.structurally_equal(self.branch2):
            raise ScenarioError("symmetric-nonlinear requires identical branch schedules")
        if self.kind == "asymmetric-nonlinear" and self.branch1.kicks:
            raise ScenarioError("asymmetric-nonlinear requires a kick-free branch 1")
        if self.kind in ("delay-only", "delay-after-nonlinear", "delay-before-nonlinear"):
            if not np.isclose(self.branch2.total_duration, self.branch1.total_duration + self.delay):
                raise ScenarioError("branch 2 must be longer than branch 1 by the delay")
            if not self.internal_schedule(2).structurally_equal(self.branch1):
                raise ScenarioError(f"{self.kind} branches must carry identical interactions")

    def internal_schedule(self, branch: int) -> PathSchedule:
        """Schedule seen by the internal dynamics, i.e. without the delay segment."""
        if branch == 1:
            return self.branch1
        sched = self.branch2
        if self.delay == 0 or self.kind in ("symmetric-nonlinear", "asymmetric-nonlinear"):
            return sched
        duration = sched.total_duration - self.delay
        if self.kind == "delay-before-nonlinear":
            kicks = tuple(KickEvent(k.time - self.delay, k.generator) for k in sched.kicks)
        else:
            kicks = sched.kicks
        # reuse branch 1 verbatim to avoid rounding from the shift
        if _same_interactions(kicks, self.branch1.kicks):
            return self.branch1
        return PathSchedule(duration, kicks)


def _same_interactions(a, b) -> bool:
    return len(a) == len(b) and all(
        np.isclose(x.time, y.time, rtol=0, atol=1e-12)
        and np.array_equal(x.generator.matrix, y.generator.matrix)
        for x, y in zip(a, b)
    )


@dataclass(frozen=True, eq=False)
class VisibilityResult:
    overlap_value: complex
    branch_states: tuple

    @property
    def visibility(self) -> float:
        return abs(self.overlap_value)


@dataclass(frozen=True)
class ScreenConfig:
    """Plane-wave screen model; ``phases`` are the sampled k*x values."""

    path_difference: float
    cm_velocity: float
    wavenumber: float = 1.0
    phases: Sequence[float] = ()

    def __post_init__(self):
        if not self.cm_velocity > 0:
            raise ValueError("centre-of-mass velocity must be > 0")

    @property
    def time_delay(self) -> float:
        return self.path_difference / self.cm_velocity


def build_scenario(
    kind: str,
    kicks: Sequence[tuple[float, HermitianOperator]] = (),
    duration: float = 1.0,
    delay: float = 0.0,
) -> Scenario:
    """Assemble a scenario from kick (time, generator) pairs inside ``duration``.

    delay-only ignores ``kicks``. The delayed variants put an extra free
    segment of length ``delay`` after (or before) the nonlinear region on
    branch 2.
    """
    if kind not in SCENARIO_KINDS:
        raise ScenarioError(f"unknown scenario kind {kind!r}")
    if delay < 0:
        raise ScenarioError(f"delay must be >= 0, got {delay!r}")
    events = tuple(KickEvent(float(t), f) for t, f in kicks)
    free = PathSchedule(duration)
    if kind == "delay-only":
        return Scenario(kind, free, PathSchedule(duration + delay), delay)
    kicked = PathSchedule(duration, events)
    if kind == "symmetric-nonlinear":
        return Scenario(kind, kicked, kicked, delay=0.0)
    if kind == "asymmetric-nonlinear":
        return Scenario(kind, free, kicked, delay=0.0)
    if kind == "delay-after-nonlinear":
        return Scenario(kind, kicked, PathSchedule(duration + delay, events), delay)
    shifted = tuple(KickEvent(e.time + delay, e.generator) for e in events)
    return Scenario(kind, kicked, PathSchedule(duration + delay, shifted), delay)


def visibility(chi0: StateVector, s: Spectrum, scenario: Scenario) -> VisibilityResult:
    chi1 = evolve_schedule(chi0, s, scenario.internal_schedule(1))
    chi2 = evolve_schedule(chi0, s, scenario.internal_schedule(2))
    return VisibilityResult(overlap(chi1, chi2), (chi1, chi2))


def screen_pattern(result: VisibilityResult, screen: ScreenConfig) -> np.ndarray:
    """Intensity 1 + |o| cos(kx + arg o + k l) at each sampled phase kx."""
    o = result.overlap_value
    phases = np.asarray(screen.phases, dtype=float)
    shift = np.angle(o) + screen.wavenumber * screen.path_difference
    return 1.0 + abs(o) * np.cos(phases + shift)


def fringe_contrast(intensity) -> float:
    i = np.asarray(intensity, dtype=float)
    return float((i.max() - i.min()) / (i.max() + i.min()))
