"""Quantum reference model for two spin-1/2 particles in the singlet state.

Probabilities, Pauli operators and the ``cos`` anticorrelation that the
classical models are measured against. Everything here is a pure function
of immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

#: Maximum deviation of an input vector's norm from 1 before it is rejected.
NORM_TOLERANCE = 1e-9


class InvalidDirectionError(ValueError):
    """Raised for analyzer directions that are not unit vectors."""


@dataclass(frozen=True)
class Direction:
    """Unit vector on the sphere giving a Stern-Gerlach analyzer setting.

    Inputs within ``NORM_TOLERANCE`` of unit length are re-normalized;
    anything further off raises :class:`InvalidDirectionError`.
    """

    x: float
    y: float
    z: float

    def __post_init__(self):
        v = np.array([self.x, self.y, self.z], dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidDirectionError(f"non-finite direction {tuple(v)}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidDirectionError(
                f"direction norm {norm!r} deviates from 1 by more than {NORM_TOLERANCE}"
            )
        v = v / norm
        object.__setattr__(self, "x", float(v[0]))
        object.__setattr__(self, "y", float(v[1]))
        object.__setattr__(self, "z", float(v[2]))

    @classmethod
    def from_vector(cls, v) -> "Direction":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    @classmethod
    def on_great_circle(cls, theta: float, base: "Direction | None" = None,
                        normal: "Direction | None" = None) -> "Direction":
        """Direction at angle ``theta`` from ``base`` along a great circle.

        Defaults to the equator parametrization ``(cos t, sin t, 0)``. With
        ``base`` and ``normal`` given (orthogonal unit vectors), the circle
        through ``base`` perpendicular to ``normal`` is used.
        """
        if base is None:
            return cls(math.cos(theta), math.sin(theta), 0.0)
        if normal is None:
            normal = Direction(0.0, 0.0, 1.0)
        b, n = base.as_array(), normal.as_array()
        if abs(b @ n) > NORM_TOLERANCE:
            raise InvalidDirectionError("base and normal must be orthogonal")
        w = np.cross(n, b)
        return cls.from_vector(math.cos(theta) * b + math.sin(theta) * w)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def angle_to(self, other: "Direction") -> float:
        """Unoriented angle in ``[0, pi]``."""
        return math.acos(min(1.0, max(-1.0, self.dot(other))))

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class Outcome:
    """Pair of measurement results ``(epsilon, eta)``, each +1 or -1."""

    epsilon: int
    eta: int

    def __post_init__(self):
        if self.epsilon not in (1, -1) or self.eta not in (1, -1):
            raise ValueError(f"outcome values must be +1 or -1, got {(self.epsilon, self.eta)}")

    @property
    def label(self) -> str:
        return ("+" if self.epsilon > 0 else "-") + ("+" if self.eta > 0 else "-")


#: Fixed outcome order used for tensor bases, partitions and count vectors.
OUTCOMES: tuple[Outcome, ...] = (Outcome(1, 1), Outcome(1, -1), Outcome(-1, 1), Outcome(-1, -1))


def all_outcomes() -> Iterator[Outcome]:
    return iter(OUTCOMES)


@dataclass(frozen=True)
class SpinOperator:
    """2x2 Hermitian matrix ``sigma(a)``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("spin operator must be 2x2")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def determinant(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=tol, rtol=0))


@dataclass(frozen=True)
class SingletState:
    """Singlet amplitudes in the product basis ordered (++, +-, -+, --)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).copy()
        if a.shape != (4,):
            raise ValueError("two-spin state needs 4 amplitudes")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def canonical(cls) -> "SingletState":
        s = 1.0 / math.sqrt(2.0)
        return cls(np.array([0.0, s, -s, 0.0]))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def pauli_operator(a: Direction) -> SpinOperator:
    """Return ``sigma(a) = [[a3, a1 - i a2], [a1 + i a2, -a3]]``."""
    return SpinOperator(np.array([[a.z, a.x - 1j * a.y], [a.x + 1j * a.y, -a.z]]))


def singlet_expectation(a: Direction, b: Direction, *, imag_tol: float = 1e-12) -> float:
    """Expectation of ``sigma(a) (x) sigma(b)`` in the singlet state.

    Computed by explicit 4x4 linear algebra rather than the dot product, so
    it can serve as an independent check of :func:`singlet_probability`.
    """
    chi = SingletState.canonical().amplitudes
    op = np.kron(pauli_operator(a).matrix, pauli_operator(b).matrix)
    value = np.vdot(chi, op @ chi)
    if abs(value.imag) > imag_tol:
        raise ArithmeticError(f"expectation has imaginary part {value.imag!r}")
    return float(value.real)


def singlet_probability(a: Direction, b: Direction, o: Outcome) -> float:
    """Probability of outcome ``o`` for analyzers ``a`` and ``b``: ``(1 - eps*eta*a.b)/4``."""
    return (1.0 - o.epsilon * o.eta * a.dot(b)) / 4.0


def singlet_probabilities(a: Direction, b: Direction) -> np.ndarray:
    """All four outcome probabilities in ``OUTCOMES`` order."""
    return np.array([singlet_probability(a, b, o) for o in OUTCOMES])


def singlet_cell_probabilities(theta) -> np.ndarray:
    """Outcome probabilities for analyzers separated by ``theta``; shape ``(..., 4)``."""
    c = np.cos(np.asarray(theta, dtype=float))
    signs = np.array([o.epsilon * o.eta for o in OUTCOMES], dtype=float)
    return (1.0 - np.multiply.outer(c, signs)) / 4.0


def quantum_anticorrelation(theta):
    """The singlet anticorrelation ``cos(theta)`` on a great circle."""
    if np.ndim(theta) == 0:
        return math.cos(theta)
    return np.cos(theta)
