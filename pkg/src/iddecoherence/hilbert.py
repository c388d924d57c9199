"""Dense finite-dimensional Hilbert-space primitives.

States and operators are thin immutable wrappers around complex numpy
arrays. Operator exponentials are always taken through an eigendecomposition
of a Hermitian generator (hbar = 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9
UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-12

__all__ = [
    "NORM_TOL",
    "UNITARY_TOL",
    "HERMITIAN_TOL",
    "InvalidOperatorError",
    "DimensionMismatchError",
    "InvalidStateError",
    "StateVector",
    "HermitianOperator",
    "Spectrum",
    "UnitaryOperator",
    "eigendecompose",
    "free_propagator",
    "kick_operator",
    "apply",
    "overlap",
]


class InvalidOperatorError(ValueError):
    """Raised when a matrix violates the Hermitian or unitary contract."""


class DimensionMismatchError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatchError(f"dimension mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over the internal basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size < 2:
            raise InvalidStateError("state dimension must be >= 2")
        if not np.all(np.isfinite(amps)):
            raise InvalidStateError("state has non-finite amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state norm {norm!r} differs from 1 by more than {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise InvalidStateError("cannot normalize a zero or non-finite vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        if not 0 <= index < dim:
            raise InvalidStateError(f"basis index {index} out of range for dim {dim}")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperatorError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidOperatorError("operator has non-finite entries")
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if dev > HERMITIAN_TOL:
            raise InvalidOperatorError(f"matrix is not Hermitian (max deviation {dev:.3e})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zeros(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_dims(self.dim, other.dim)
        return HermitianOperator(self.matrix + other.matrix)

    def __mul__(self, c: float) -> "HermitianOperator":
        return HermitianOperator(float(c) * self.matrix)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigendata of a Hermitian operator.

    ``eigenvalues`` are ascending; column ``i`` of ``eigenvectors`` is the
    eigenvector belonging to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        e = np.array(self.eigenvalues, dtype=np.float64, copy=True)
        e.setflags(write=False)
        v = _frozen(self.eigenvectors)
        if v.shape != (e.size, e.size):
            raise InvalidOperatorError("eigenvector matrix shape does not match eigenvalues")
        if np.any(np.diff(e) < 0):
            raise InvalidOperatorError("eigenvalues must be sorted ascending")
        dev = np.max(np.abs(v.conj().T @ v - np.eye(e.size)))
        if dev > UNITARY_TOL:
            raise InvalidOperatorError(f"eigenvector matrix is not unitary (deviation {dev:.3e})")
        object.__setattr__(self, "eigenvalues", e)
        object.__setattr__(self, "eigenvectors", v)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperatorError(f"expected a square matrix, got shape {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if dev > UNITARY_TOL:
            raise InvalidOperatorError(f"matrix is not unitary (deviation {dev:.3e})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryOperator":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        if isinstance(other, UnitaryOperator):
            _check_dims(self.dim, other.dim)
            return UnitaryOperator(self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T)


def eigendecompose(h: HermitianOperator) -> Spectrum:
    """Diagonalize ``h``; raises InvalidOperatorError if it is not Hermitian."""
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(h)
    evals, evecs = np.linalg.eigh(h.matrix)
    return Spectrum(evals, evecs)


def _phase_function(s: Spectrum, phases: np.ndarray) -> np.ndarray:
    v = s.eigenvectors
    return (v * np.exp(-1j * phases)) @ v.conj().T


def free_propagator(s: Spectrum, dt: float) -> UnitaryOperator:
    """exp(-i H dt) for the operator whose eigendata is ``s``. Negative ``dt`` runs backward."""
    dt = float(dt)
    if not np.isfinite(dt):
        raise ValueError(f"duration must be finite, got {dt}")
    if dt == 0.0:
        return UnitaryOperator.identity(s.dim)
    return UnitaryOperator(_phase_function(s, s.eigenvalues * dt))


def kick_operator(f: HermitianOperator) -> UnitaryOperator:
    """exp(-i F) for an instantaneous kick generated by ``f``."""
    return free_propagator(eigendecompose(f), 1.0)


def apply(u: UnitaryOperator, state: StateVector) -> StateVector:
    _check_dims(u.dim, state.dim)
    return StateVector(u.matrix @ state.amplitudes)


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_dims(a.dim, b.dim)
    return complex(np.vdot(a.amplitudes, b.amplitudes))
