"""Hidden-variable simulations of the singlet experiment.

Two constructions:

* the rectangle partition of the unit square, which reproduces the quantum
  outcome distribution exactly but needs *both* analyzer settings to decide
  an outcome (non-local);
* Bell's hemisphere model, a local model on the sphere whose correlation is
  the triangle function ``1 - 2|t|/pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .correlation import TWO_PI, CorrelationFunction, reduce_angle
from .quantum import OUTCOMES, Direction, Outcome, singlet_probabilities
from .streams import chunked, derived_seeds, make_rng, run_partitioned

_CHUNK = 1 << 16


class EmptySampleError(ValueError):
    """Raised when a sampler is asked for zero draws."""


@dataclass(frozen=True)
class RectanglePartition:
    """Four full-height strips ``[u0, u1) x [0, 1)`` laid out in ``OUTCOMES`` order.

    Strip widths are the quantum probabilities for the pair ``(a, b)``.
    """

    a: Direction
    b: Direction
    edges: tuple[float, float, float, float, float]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.array(self.edges))

    def interval(self, o: Outcome) -> tuple[float, float]:
        i = OUTCOMES.index(o)
        return self.edges[i], self.edges[i + 1]

    def classify(self, u) -> np.ndarray:
        """Index into ``OUTCOMES`` of the strip containing each ``u`` in ``[0, 1)``."""
        inner = np.array(self.edges[1:4])
        return np.searchsorted(inner, np.asarray(u), side="right")

    def outcome_at(self, u: float) -> Outcome:
        return OUTCOMES[int(self.classify(u))]


def build_rectangle_partition(a: Direction, b: Direction) -> RectanglePartition:
    p = singlet_probabilities(a, b)
    edges = np.concatenate([[0.0], np.cumsum(p)])
    edges[-1] = 1.0
    return RectanglePartition(a, b, tuple(float(e) for e in edges))


def sample_wigner(p: RectanglePartition, n: int, seed: int, workers: int = 1) -> np.ndarray:
    """Draw ``n`` uniform points of ``[0, 1)`` and count them per strip.

    Returns counts in ``OUTCOMES`` order.
    """
    if n < 1:
        raise EmptySampleError("sample_wigner needs n >= 1")

    def task(rng, m):
        counts = np.zeros(4, dtype=np.int64)
        for size in chunked(m, _CHUNK):
            counts += np.bincount(p.classify(rng.random(size)), minlength=4)
        return counts

    return np.sum(run_partitioned(task, n, seed, workers), axis=0)


@dataclass(frozen=True)
class HiddenVariable:
    """Point on the unit sphere."""

    omega: tuple[float, float, float]

    def __post_init__(self):
        if abs(math.hypot(*self.omega) - 1.0) > 1e-12:
            raise ValueError("hidden variable must lie on the unit sphere")

    def as_array(self) -> np.ndarray:
        return np.array(self.omega)


def sample_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniform points on the sphere, shape ``(n, 3)``.

    ``z`` uniform on [-1, 1] and azimuth uniform on [0, 2pi), drawn in that order.
    """
    z = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, TWO_PI, n)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def sample_hidden_variable(rng: np.random.Generator) -> HiddenVariable:
    w = sample_sphere(rng, 1)[0]
    return HiddenVariable(tuple(float(c) for c in w / np.linalg.norm(w)))


def bell_response(a: Direction, omega: HiddenVariable) -> int:
    """+1 if ``omega . a > 0`` else -1 (the boundary great circle maps to -1)."""
    return 1 if float(omega.as_array() @ a.as_array()) > 0.0 else -1


def bell_correlation_exact(t):
    """Bell's triangle correlation ``1 - 2|t|/pi`` continued 2pi-periodically."""
    r = reduce_angle(t)
    out = 1.0 - 2.0 * r / math.pi
    return float(out) if np.ndim(t) == 0 else out


class LocalHiddenVariableModel:
    """Sampler of hidden variables plus a response map ``(a, omega) -> +-1``.

    The response only ever sees its own analyzer direction; the partner's
    response is ``g_a = -f_a``.
    """

    name = "lhv"

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def responses(self, a: np.ndarray, omegas: np.ndarray) -> np.ndarray:
        """Vectorized response for one direction array ``a`` over many hidden variables."""
        raise NotImplementedError

    def response_matrix(self, dirs: np.ndarray, omegas: np.ndarray) -> np.ndarray:
        """Responses for each row of ``dirs``; shape ``(len(omegas), len(dirs))``."""
        return np.column_stack([self.responses(d, omegas) for d in dirs])

    def exact_correlation(self, t):
        return None

    def cell_probabilities(self, theta) -> np.ndarray:
        """Joint outcome distribution ``P(f_a = eps, g_b = eta)`` at separation ``theta``."""
        raise NotImplementedError


class BellHemisphereModel(LocalHiddenVariableModel):
    """``f_a(omega) = sign(omega . a)`` with ``omega`` uniform on the sphere."""

    name = "bell"

    def sample(self, rng, n):
        return sample_sphere(rng, n)

    def responses(self, a, omegas):
        return np.where(omegas @ np.asarray(a, dtype=float) > 0.0, 1, -1).astype(np.int8)

    def response_matrix(self, dirs, omegas):
        return np.where(omegas @ np.asarray(dirs, dtype=float).T > 0.0, 1, -1).astype(np.int8)

    def exact_correlation(self, t):
        return bell_correlation_exact(t)

    def cell_probabilities(self, theta):
        # f_a, f_b agree with probability 1 - theta/pi and have fair marginals;
        # g_b = -f_b, so eps*eta = +1 means f_a and f_b disagree
        disagree = np.asarray(reduce_angle(theta))[..., None] / math.pi
        signs = np.array([o.epsilon * o.eta for o in OUTCOMES])
        return np.where(signs > 0, disagree, 1.0 - disagree) / 2.0


def simulate_correlation(
    model: LocalHiddenVariableModel,
    grid: Sequence[float] | np.ndarray,
    n: int,
    seed: int,
    *,
    base: Direction | None = None,
    normal: Direction | None = None,
    workers: int = 1,
) -> CorrelationFunction:
    """Monte Carlo estimate of ``C(theta) = <f_a0 f_a(theta)>`` on ``grid``.

    The same hidden variables are used for every grid angle. The returned
    function carries per-point standard errors ``sqrt((1 - C^2)/n)`` and the
    full estimated covariance of the estimates.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("grid must be a non-empty list of angles")
    if n < 1:
        raise EmptySampleError("simulate_correlation needs n >= 1")
    if np.any(grid < 0) or np.any(grid >= TWO_PI):
        raise ValueError("grid angles must lie in [0, 2pi)")
    if base is None:
        base = Direction(1.0, 0.0, 0.0)
    if normal is None:
        normal = Direction(0.0, 0.0, 1.0)
    a0 = base.as_array()
    dirs = np.array([Direction.on_great_circle(t, base, normal).as_array() for t in grid])
    g = len(grid)

    def task(rng, m):
        sums = np.zeros(g)
        cross = np.zeros((g, g))
        for size in chunked(m, _CHUNK):
            omegas = model.sample(rng, size)
            f0 = model.responses(a0, omegas)
            x = model.response_matrix(dirs, omegas).astype(float) * f0[:, None]
            sums += x.sum(axis=0)
            cross += x.T @ x
        return sums, cross

    parts = run_partitioned(task, n, seed, workers)
    sums = sum(p[0] for p in parts)
    cross = sum(p[1] for p in parts)
    c_hat = sums / n
    se = np.sqrt(np.maximum(0.0, 1.0 - c_hat**2) / n)
    cov = (cross / n - np.outer(c_hat, c_hat)) / n
    return CorrelationFunction(grid, c_hat, se, covariance=cov, n_samples=n, label=f"{model.name} MC n={n}")


def simulate_wigner_correlation(
    grid: Sequence[float] | np.ndarray,
    n: int,
    seed: int,
    *,
    base: Direction | None = None,
    normal: Direction | None = None,
    workers: int = 1,
) -> CorrelationFunction:
    """Anticorrelation ``-E(theta)`` estimated from rectangle-partition counts.

    Each grid angle gets an independent stream derived from ``seed``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("grid must be a non-empty list of angles")
    if n < 1:
        raise EmptySampleError("simulate_wigner_correlation needs n >= 1")
    if base is None:
        base = Direction(1.0, 0.0, 0.0)
    values, errs = [], []
    for theta, s in zip(grid, derived_seeds(seed, len(grid))):
        b = Direction.on_great_circle(theta, base, normal)
        counts = sample_wigner(build_rectangle_partition(base, b), n, s, workers)
        e = pair_expectation(counts)
        values.append(-e)
        errs.append(math.sqrt(max(0.0, 1.0 - e * e) / n))
    return CorrelationFunction(grid, np.array(values), np.array(errs), n_samples=n, label=f"wigner n={n}")


def pair_expectation(counts) -> float:
    """``(n_pp + n_mm - n_pm - n_mp) / n`` for counts in outcome order."""
    c = np.asarray(counts, dtype=float)
    return float((c[0] + c[3] - c[1] - c[2]) / c.sum())


def sample_counts(cell_probs: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial outcome counts, one row per row of ``cell_probs``."""
    p = np.clip(np.asarray(cell_probs, dtype=float), 0.0, None)
    p = p / p.sum(axis=-1, keepdims=True)
    return np.array([rng.multinomial(n, row) for row in np.atleast_2d(p)])


MODELS = {"bell": BellHemisphereModel}


def get_model(name: str) -> LocalHiddenVariableModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None


__all__ = [
    "BellHemisphereModel",
    "EmptySampleError",
    "HiddenVariable",
    "LocalHiddenVariableModel",
    "RectanglePartition",
    "bell_correlation_exact",
    "bell_response",
    "build_rectangle_partition",
    "get_model",
    "make_rng",
    "sample_counts",
    "sample_hidden_variable",
    "sample_sphere",
    "sample_wigner",
    "simulate_correlation",
    "simulate_wigner_correlation",
    "pair_expectation",
]
