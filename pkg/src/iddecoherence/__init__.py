"""Decoherence of centre-of-mass interference by an object's own internal dynamics.

The centre of mass follows classical branch paths; its coupling to the
internal degrees of freedom acts as a time-dependent perturbation on a
finite internal Hilbert space. Visibilities, echo fidelities and
weak-localization loop overlaps are overlaps of the resulting internal
states.
"""
__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    HermitianOperator,
    Spectrum,
    StateVector,
    UnitaryOperator,
    apply,
    eigendecompose,
    free_propagator,
    kick_operator,
    overlap,
)
from .models import (  # noqa: E402
    InitialStateSpec,
    KickSpec,
    ModelSpec,
    build_hamiltonian,
    build_kick,
    eigenbasis_ensemble,
    gap_ratio,
    initial_state,
)
from .propagation import (  # noqa: E402
    ContinuousCoupling,
    FidelityTrace,
    KickEvent,
    PathSchedule,
    echo_overlap,
    evolve_schedule,
    fidelity_trace,
    fit_decay_rate,
    interaction_picture_overlap,
    periodic_schedule,
    trotter_evolve,
)
from .interferometry import (  # noqa: E402
    Scenario,
    ScreenConfig,
    VisibilityResult,
    build_scenario,
    screen_pattern,
    visibility,
)
from .weak_localization import (  # noqa: E402
    EnsembleParams,
    LoopSpec,
    ensemble_overlap,
    loop_overlap,
    loop_schedules,
)

__all__ = [
    "HermitianOperator",
    "Spectrum",
    "StateVector",
    "UnitaryOperator",
    "apply",
    "eigendecompose",
    "free_propagator",
    "kick_operator",
    "overlap",
    "InitialStateSpec",
    "KickSpec",
    "ModelSpec",
    "build_hamiltonian",
    "build_kick",
    "eigenbasis_ensemble",
    "gap_ratio",
    "initial_state",
    "ContinuousCoupling",
    "FidelityTrace",
    "KickEvent",
    "PathSchedule",
    "echo_overlap",
    "evolve_schedule",
    "fidelity_trace",
    "fit_decay_rate",
    "interaction_picture_overlap",
    "periodic_schedule",
    "trotter_evolve",
    "Scenario",
    "ScreenConfig",
    "VisibilityResult",
    "build_scenario",
    "screen_pattern",
    "visibility",
    "EnsembleParams",
    "LoopSpec",
    "ensemble_overlap",
    "loop_overlap",
    "loop_schedules",
]
