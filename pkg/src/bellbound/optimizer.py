"""Minimum distance to ``cos`` over the Fourier relaxation.

Feasible spectra satisfy ``0 <= c_k <= 4/pi^2`` for ``k = 0..k_max``, the
normalization ``C(0) = c_0 + 2 sum_{k>=1} c_k = 1`` and optionally
``c_0 = 0``. These are necessary conditions only, so every optimum found
here is a relaxation optimum: it bounds the true infimum from below.

In coefficient space ``||C - cos||^2 = c_0^2 + 2 (c_1 - 1/2)^2 + 2 sum_{k>=2} c_k^2``,
a separable convex quadratic with Hessian ``diag(2, 4, 4, ...)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .analysis import COEFFICIENT_CAP, DISTANCE_BOUND, SCHEMA_VERSION, FourierSpectrum, cosine_function, \
    l2_distance, reconstruct_from_spectrum
from .streams import make_rng

RELAXATION_NOTE = "relaxation optimum: lower bounds the true infimum"
STEP_LIPSCHITZ = 4.0
MAX_ITER = 100_000
F_TOL = 1e-14


class InfeasibleConstraintsError(ValueError):
    """The constraint set is empty.

    ``reachable`` is the interval of ``c_0 + 2 sum c_k`` attainable within
    the box; the normalization needs it to contain 1.
    """

    def __init__(self, message: str, reachable: tuple[float, float]):
        super().__init__(message)
        self.reachable = reachable

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "status": "infeasible",
            "message": str(self),
            "normalization_target": 1.0,
            "reachable_min": self.reachable[0],
            "reachable_max": self.reachable[1],
        }


@dataclass(frozen=True)
class SpectrumConstraints:
    k_max: int
    lower: float = 0.0
    upper: float = COEFFICIENT_CAP
    c0_zero: bool = False

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.lower <= self.upper:
            raise ValueError("box lower bound exceeds upper bound")

    @property
    def size(self) -> int:
        return self.k_max + 1

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.size, float(self.lower))
        hi = np.full(self.size, float(self.upper))
        if self.c0_zero:
            lo[0] = hi[0] = 0.0
        return lo, hi

    def weights(self) -> np.ndarray:
        w = np.full(self.size, 2.0)
        w[0] = 1.0
        return w

    def check_feasible(self) -> None:
        lo, hi = self.bounds()
        w = self.weights()
        reach = (float(w @ lo), float(w @ hi))
        if not reach[0] <= 1.0 <= reach[1]:
            raise InfeasibleConstraintsError(
                f"normalization c_0 + 2*sum(c_k) = 1 unreachable: box allows [{reach[0]!r}, {reach[1]!r}]",
                reach,
            )

    def violation(self, c: np.ndarray) -> float:
        lo, hi = self.bounds()
        return float(max(np.max(lo - c, initial=0.0), np.max(c - hi, initial=0.0),
                         abs(self.weights() @ c - 1.0)))


def objective(c: np.ndarray) -> float:
    return float(c[0] ** 2 + 2.0 * (c[1] - 0.5) ** 2 + 2.0 * np.sum(c[2:] ** 2))


def gradient(c: np.ndarray) -> np.ndarray:
    g = 4.0 * c
    g[0] = 2.0 * c[0]
    g[1] = 4.0 * (c[1] - 0.5)
    return g


def _hessian_diag(n: int) -> np.ndarray:
    h = np.full(n, 4.0)
    h[0] = 2.0
    return h


def _linear_term(n: int) -> np.ndarray:
    b = np.zeros(n)
    b[1] = 2.0
    return b


def project(x: np.ndarray, lo: np.ndarray, hi: np.ndarray, w: np.ndarray, target: float = 1.0,
            tol: float = 1e-15) -> np.ndarray:
    """Euclidean projection onto ``{lo <= y <= hi, w . y = target}``.

    The solution is ``clip(x + lam w, lo, hi)`` with the dual variable
    ``lam`` found by bisection (``w . y(lam)`` is non-decreasing).
    """
    def level(lam):
        return float(w @ np.clip(x + lam * w, lo, hi))

    a, b = -1.0, 1.0
    while level(a) > target:
        a *= 2.0
    while level(b) < target:
        b *= 2.0
    for _ in range(200):
        mid = 0.5 * (a + b)
        if level(mid) < target:
            a = mid
        else:
            b = mid
        if b - a <= tol * max(1.0, abs(mid)):
            break
    y = np.clip(x + 0.5 * (a + b) * w, lo, hi)
    # absorb the last rounding error in a free coordinate
    free = np.nonzero((y > lo) & (y < hi))[0]
    if len(free):
        i = free[np.argmax(np.minimum(y[free] - lo[free], hi[free] - y[free]))]
        y[i] += (target - w @ y) / w[i]
        y[i] = min(max(y[i], lo[i]), hi[i])
    return y


@dataclass(frozen=True)
class OptimizationResult:
    spectrum: FourierSpectrum
    objective: float
    active_set: tuple[tuple[int, str], ...]
    iterations: int
    converged: bool
    kkt_residual: float
    constraints: SpectrumConstraints
    note: str = field(default=RELAXATION_NOTE)

    @property
    def distance(self) -> float:
        return math.sqrt(self.objective)

    @property
    def margin(self) -> float:
        return self.distance - DISTANCE_BOUND

    def to_dict(self) -> dict:
        d = self.spectrum.to_dict()
        d.update(
            status="optimal" if self.converged else "not-converged",
            objective=self.objective,
            distance=self.distance,
            bound=DISTANCE_BOUND,
            margin=self.margin,
            active_set=[{"k": k, "bound": side} for k, side in self.active_set],
            iterations=self.iterations,
            kkt_residual=self.kkt_residual,
            c0_zero=self.constraints.c0_zero,
            note=self.note,
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def kkt_residual(c: np.ndarray, cons: SpectrumConstraints) -> float:
    """Projected-gradient norm ``||c - P(c - grad f(c))||_inf``; zero exactly at the optimum."""
    lo, hi = cons.bounds()
    return float(np.max(np.abs(c - project(c - gradient(c), lo, hi, cons.weights()))))


def _active(c, lo, hi, tol=1e-12):
    out = []
    for i, (x, l, h) in enumerate(zip(c, lo, hi)):
        if l == h:
            out.append((i, "fixed"))
        elif x <= l + tol:
            out.append((i, "lower"))
        elif x >= h - tol:
            out.append((i, "upper"))
    return tuple(out)


def _polish(c: np.ndarray, cons: SpectrumConstraints, max_rounds: int = 50) -> np.ndarray | None:
    """Solve the equality-constrained problem on the free set exactly, adjusting the active set."""
    lo, hi = cons.bounds()
    w = cons.weights()
    h = _hessian_diag(len(c))
    b = _linear_term(len(c))
    fixed = {i: side for i, side in _active(c, lo, hi, tol=1e-9)}
    for _ in range(max_rounds):
        x = np.empty_like(c)
        for i, side in fixed.items():
            x[i] = hi[i] if side == "upper" else lo[i]
        free = np.array([i for i in range(len(c)) if i not in fixed], dtype=int)
        if len(free) == 0:
            return x if abs(w @ x - 1.0) <= 1e-12 else None
        rest = 1.0 - sum(w[i] * x[i] for i in fixed)
        mu = (rest - np.sum(w[free] * b[free] / h[free])) / np.sum(w[free] ** 2 / h[free])
        x[free] = (b[free] + mu * w[free]) / h[free]
        # primal feasibility on the free set
        viol = [i for i in free if x[i] < lo[i] - 1e-15 or x[i] > hi[i] + 1e-15]
        if viol:
            for i in viol:
                fixed[i] = "lower" if x[i] < lo[i] else "upper"
            continue
        # dual sign on the active set: g_i - mu w_i >= 0 at lower, <= 0 at upper
        g = h * x - b
        wrong = [i for i, side in fixed.items() if lo[i] != hi[i] and
                 ((side == "lower" and g[i] - mu * w[i] < -1e-12) or (side == "upper" and g[i] - mu * w[i] > 1e-12))]
        if not wrong:
            return x
        for i in wrong:
            del fixed[i]
    return None


def solve_min_distance(cons: SpectrumConstraints, *, max_iter: int = MAX_ITER, f_tol: float = F_TOL,
                       polish: bool = True) -> OptimizationResult:
    """Minimize ``||C - cos||^2`` over feasible spectra.

    Projected gradient with fixed step ``1/4`` (the largest Hessian
    eigenvalue), stopped when the objective changes by at most ``f_tol``,
    then an active-set polish that solves the remaining equality-constrained
    problem exactly.

    Raises :class:`InfeasibleConstraintsError` if no spectrum satisfies the
    constraints.
    """
    cons.check_feasible()
    lo, hi = cons.bounds()
    w = cons.weights()
    c = project(np.zeros(cons.size), lo, hi, w)
    f = objective(c)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        c_new = project(c - gradient(c) / STEP_LIPSCHITZ, lo, hi, w)
        f_new = objective(c_new)
        change = abs(f - f_new)
        c, f = c_new, f_new
        if change <= f_tol:
            converged = True
            break
    if polish:
        polished = _polish(c, cons)
        if polished is not None and cons.violation(polished) <= 1e-12 and objective(polished) <= f + 1e-15:
            c = polished
    res = kkt_residual(c, cons)
    return OptimizationResult(
        spectrum=FourierSpectrum(c),
        objective=objective(c),
        active_set=_active(c, lo, hi),
        iterations=it,
        converged=converged and res <= 1e-9,
        kkt_residual=res,
        constraints=cons,
    )


def closed_form_objective(k_max: int) -> float:
    """Optimum for the default box: ``c_1`` at the cap, remaining mass spread evenly.

    With ``m = 1 - 8/pi^2`` shared equally by ``c_0`` (weight 1) and
    ``c_2..c_kmax`` (weight 2), the optimum is ``m^2/2 + m^2/(2 k_max - 1)``.
    """
    m = 1.0 - 8.0 / math.pi**2
    return m * m / 2.0 + m * m / (2 * k_max - 1)


def bound_approach_curve(k_max_list: Iterable[int], tol: float = 1e-8) -> list[tuple[int, float]]:
    """Optimal relaxation distance for each ``k_max``; checks the closed form as it goes."""
    out = []
    prev = None
    for k in k_max_list:
        if prev is not None and k <= prev:
            raise ValueError("k_max values must be increasing")
        r = solve_min_distance(SpectrumConstraints(k))
        expected = closed_form_objective(k)
        if abs(r.objective - expected) > tol:
            raise ArithmeticError(f"k_max={k}: objective {r.objective!r} departs from {expected!r}")
        out.append((k, r.distance))
        prev = k
    return out


def grid_for(k_max: int, minimum: int = 64) -> int:
    n = minimum
    while n <= 2 * k_max:
        n *= 2
    return n


def spectrum_distance(s: FourierSpectrum, grid_n: int | None = None) -> float:
    """``||C - cos||`` of the reconstructed function, by quadrature."""
    n = grid_n or grid_for(s.k_max)
    return l2_distance(reconstruct_from_spectrum(s, n), cosine_function(n))


def random_feasible_spectra(cons: SpectrumConstraints, trials: int, rng: np.random.Generator,
                            max_attempts: int | None = None) -> Iterable[np.ndarray]:
    """Yield feasible spectra: uniform box draws scaled onto the normalization, box violators rejected."""
    lo, hi = cons.bounds()
    w = cons.weights()
    produced = 0
    attempts = 0
    max_attempts = max_attempts or 1000 * trials
    while produced < trials:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("rejection sampler could not find feasible spectra")
        u = rng.uniform(lo, hi)
        total = w @ u
        if total <= 0:
            continue
        c = u / total
        if np.all(c <= hi) and np.all(c >= lo):
            produced += 1
            yield c


def verify_never_below_bound(trials: int, seed: int, k_max: int = 16, c0_zero: bool = False,
                             extra: Sequence[FourierSpectrum] = ()) -> float:
    """Worst ``||C - cos|| - (1 - 8/pi^2)/sqrt(2)`` over random feasible spectra (and ``extra``)."""
    if trials < 1 and not extra:
        raise ValueError("trials must be >= 1")
    cons = SpectrumConstraints(k_max, c0_zero=c0_zero)
    rng = make_rng(seed)
    n = grid_for(k_max)
    cos_f = cosine_function(n)
    worst = math.inf
    for c in random_feasible_spectra(cons, trials, rng):
        d = l2_distance(reconstruct_from_spectrum(FourierSpectrum(c), n), cos_f)
        worst = min(worst, d - DISTANCE_BOUND)
    for s in extra:
        worst = min(worst, spectrum_distance(s) - DISTANCE_BOUND)
    return worst
