"""Internal Hamiltonians, kick generators and initial internal states."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import ortho_group

from .hilbert import HermitianOperator, Spectrum, StateVector

MODEL_KINDS = ("harmonic", "goe")
KICK_BASES = ("eigenbasis-diagonal", "rotated")
INITIAL_KINDS = ("ground-state", "basis-state", "random-vector")


@dataclass(frozen=True)
class ModelSpec:
    """Internal Hamiltonian recipe.

    ``scale`` is the level spacing for ``harmonic`` and the off-diagonal
    standard deviation for ``goe``.
    """

    kind: str
    dim: int
    scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"model dim must be an integer >= 2, got {self.dim!r}")
        if not self.scale > 0:
            raise ValueError(f"model scale must be > 0, got {self.scale!r}")
        if self.seed < 0:
            raise ValueError("model seed must be non-negative")


@dataclass(frozen=True)
class KickSpec:
    """Recipe for one kick generator F = strength * R D R^T.

    D is diagonal with entries uniform in [-1, 1] drawn from ``seed``. For
    ``eigenbasis-diagonal`` R is the eigenvector matrix of the internal
    Hamiltonian, so F commutes with it. For ``rotated`` R is a random real
    orthogonal matrix drawn from ``rotation_seed`` (defaults to ``seed``).
    """

    strength: float
    basis: str = "rotated"
    seed: int = 0
    rotation_seed: Optional[int] = None

    def __post_init__(self):
        if not self.strength >= 0:
            raise ValueError(f"kick strength must be >= 0, got {self.strength!r}")
        if self.basis not in KICK_BASES:
            raise ValueError(f"kick basis must be one of {KICK_BASES}, got {self.basis!r}")
        if self.seed < 0 or (self.rotation_seed is not None and self.rotation_seed < 0):
            raise ValueError("kick seeds must be non-negative")

    def with_seed_offset(self, offset: int) -> "KickSpec":
        rot = None if self.rotation_seed is None else self.rotation_seed + offset
        return KickSpec(self.strength, self.basis, self.seed + offset, rot)


@dataclass(frozen=True)
class InitialStateSpec:
    kind: str = "ground-state"
    index: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValueError(f"initial state kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if self.index < 0 or self.seed < 0:
            raise ValueError("initial state index and seed must be non-negative")


def build_hamiltonian(spec: ModelSpec) -> HermitianOperator:
    n = spec.dim
    if spec.kind == "harmonic":
        return HermitianOperator(np.diag(spec.scale * np.arange(n, dtype=float)))
    rng = np.random.default_rng(spec.seed)
    a = rng.normal(0.0, spec.scale, size=(n, n))
    # off-diagonal std = scale, diagonal std = sqrt(2) * scale
    return HermitianOperator((a + a.T) / np.sqrt(2.0))


def random_orthogonal(dim: int, seed: int) -> np.ndarray:
    return ortho_group.rvs(dim, random_state=np.random.default_rng(seed))


def build_kick(spec: KickSpec, spectrum: Spectrum) -> HermitianOperator:
    n = spectrum.dim
    if spec.strength == 0:
        return HermitianOperator.zeros(n)
    d = np.random.default_rng(spec.seed).uniform(-1.0, 1.0, size=n)
    if spec.basis == "eigenbasis-diagonal":
        r = spectrum.eigenvectors
    else:
        rot_seed = spec.seed if spec.rotation_seed is None else spec.rotation_seed
        r = random_orthogonal(n, rot_seed)
    f = spec.strength * (r * d) @ r.conj().T
    # symmetrize away rounding so the Hermiticity check is exact
    return HermitianOperator(0.5 * (f + f.conj().T))


def initial_state(spec: InitialStateSpec, spectrum: Spectrum) -> StateVector:
    n = spectrum.dim
    if spec.kind == "ground-state":
        return StateVector.normalized(spectrum.eigenvectors[:, 0])
    if spec.kind == "basis-state":
        if spec.index >= n:
            raise ValueError(f"basis index {spec.index} out of range for dim {n}")
        return StateVector.basis(n, spec.index)
    rng = np.random.default_rng(spec.seed)
    return StateVector.normalized(rng.normal(size=n) + 1j * rng.normal(size=n))


def eigenbasis_ensemble(spectrum: Spectrum) -> list[StateVector]:
    """All eigenstates of the internal Hamiltonian, for equal-weight averaging."""
    return [StateVector.normalized(col) for col in spectrum.eigenvectors.T]


def gap_ratio(eigenvalues) -> float:
    """Mean adjacent-gap ratio <min(g_i, g_i+1) / max(g_i, g_i+1)>.

    About 0.386 for Poisson levels and 0.531 for GOE.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    g = np.diff(e)
    lo = np.minimum(g[:-1], g[1:])
    hi = np.maximum(g[:-1], g[1:])
    ok = hi > 0
    return float(np.mean(lo[ok] / hi[ok]))
