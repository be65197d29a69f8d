"""Fourier and L2 diagnostics of correlation functions.

Quadratures use the periodic rectangle rule on the uniform grid, which is
exact for trigonometric polynomials below the Nyquist index and converges
as O(N^-2) for functions with kinks, such as Bell's triangle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .correlation import TWO_PI, CorrelationFunction, GridError, reduce_angle, uniform_grid

#: Upper bound on every Fourier coefficient of a +-1 process correlation.
COEFFICIENT_CAP = 4.0 / math.pi**2
#: Lower bound on ||C - cos|| for any such correlation function.
DISTANCE_BOUND = (1.0 - 8.0 / math.pi**2) / math.sqrt(2.0)

SCHEMA_VERSION = 1


class AliasingError(ValueError):
    """Raised when ``k_max`` reaches the Nyquist index of the grid."""


class AngleRangeError(ValueError):
    """Raised for analyzer separations outside the admissible range."""


class SpectrumFormatError(ValueError):
    """Raised for malformed spectrum JSON."""


@dataclass(frozen=True)
class FourierSpectrum:
    """Cosine coefficients ``c_0 .. c_kmax`` (``c_-k = c_k``)."""

    coefficients: np.ndarray
    grid_n: Optional[int] = None
    std_err: Optional[np.ndarray] = field(default=None, compare=False)
    imag_residue: float = field(default=0.0, compare=False)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("spectrum needs at least c_0")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if self.std_err is not None:
            se = np.array(self.std_err, dtype=float)
            se.setflags(write=False)
            object.__setattr__(self, "std_err", se)

    @property
    def k_max(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, k: int) -> float:
        return float(self.coefficients[abs(k)])

    @property
    def norm_squared(self) -> float:
        """``c_0^2 + 2 sum_{k>=1} c_k^2`` (Parseval)."""
        c = self.coefficients
        return float(c[0] ** 2 + 2.0 * np.sum(c[1:] ** 2))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "k_max": self.k_max,
            "coefficients": [float(x) for x in self.coefficients],
            "grid_n": self.grid_n,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "FourierSpectrum":
        try:
            coeffs = [float(x) for x in d["coefficients"]]
            k_max = int(d["k_max"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpectrumFormatError(f"bad spectrum record: {exc}") from None
        if k_max != len(coeffs) - 1:
            raise SpectrumFormatError(f"k_max={k_max} but {len(coeffs)} coefficients")
        grid_n = d.get("grid_n")
        return cls(np.array(coeffs), None if grid_n is None else int(grid_n))

    @classmethod
    def from_json(cls, text: str) -> "FourierSpectrum":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpectrumFormatError(f"malformed JSON: {exc}") from None
        if not isinstance(d, dict):
            raise SpectrumFormatError("spectrum JSON must be an object")
        return cls.from_dict(d)

    @classmethod
    def read(cls, path) -> "FourierSpectrum":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _cos_matrix(k_max: int, n: int) -> np.ndarray:
    k = np.arange(k_max + 1)
    # integer phase reduction keeps cos(k t_j) accurate for large k*j
    return np.cos(TWO_PI * (np.outer(k, np.arange(n)) % n) / n)


def _sin_matrix(k_max: int, n: int) -> np.ndarray:
    k = np.arange(k_max + 1)
    return np.sin(TWO_PI * (np.outer(k, np.arange(n)) % n) / n)


def fourier_coefficients(C: CorrelationFunction, k_max: int) -> FourierSpectrum:
    """Cosine coefficients ``c_k = (1/N) sum_j cos(k t_j) C(t_j)``.

    The sine part is computed as well and kept as ``imag_residue``; for
    closed-form input it must vanish to 1e-10.
    """
    C.require_quadrature_grid()
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if 2 * k_max >= C.n:
        raise AliasingError(f"k_max={k_max} needs a grid of more than {2 * k_max} points, got {C.n}")
    cos_w = _cos_matrix(k_max, C.n) / C.n
    coeffs = cos_w @ C.values
    residue = float(np.max(np.abs(_sin_matrix(k_max, C.n) @ C.values))) / C.n
    if C.is_closed_form and residue > 1e-10:
        raise ArithmeticError(f"closed-form correlation has imaginary Fourier residue {residue!r}")
    se = None
    if np.any(C.std_err):
        cov = C.error_covariance
        se = np.sqrt(np.maximum(0.0, np.einsum("kj,jl,kl->k", cos_w, cov, cos_w)))
    return FourierSpectrum(coeffs, C.n, se, residue)


def full_spectrum(C: CorrelationFunction) -> np.ndarray:
    """All discrete cosine coefficients ``c_0 .. c_{N/2}`` via the FFT."""
    C.require_quadrature_grid()
    return np.fft.rfft(C.values).real / C.n


def parseval_residual(C: CorrelationFunction) -> float:
    """``|sum of squared coefficients - ||C||^2|`` on the grid (zero up to rounding).

    Includes the Nyquist term ``c_{N/2}^2`` which the discrete identity needs.
    """
    c = full_spectrum(C)
    s = np.fft.rfft(C.values).imag / C.n
    n = C.n
    total = c[0] ** 2 + 2.0 * np.sum(c[1 : n // 2] ** 2 + s[1 : n // 2] ** 2) + c[n // 2] ** 2
    return abs(float(total) - l2_norm(C) ** 2)


def reconstruct_from_spectrum(s: FourierSpectrum, grid_n: int) -> CorrelationFunction:
    """Evaluate ``c_0 + 2 sum_k c_k cos(k t)`` on the uniform ``grid_n`` grid."""
    if grid_n < 1:
        raise ValueError("grid_n must be positive")
    weights = s.coefficients.copy()
    weights[1:] *= 2.0
    values = weights @ _cos_matrix(s.k_max, grid_n)

    def series(t, _w=weights):
        t = np.asarray(t, dtype=float)
        return np.cos(np.multiply.outer(t, np.arange(len(_w)))) @ _w

    return CorrelationFunction(uniform_grid(grid_n), values, np.zeros(grid_n), exact=series,
                               label=f"series k_max={s.k_max}")


@dataclass(frozen=True)
class BoundCheckReport:
    """Per-coefficient check of ``0 <= c_k <= 4/pi^2``.

    ``lower_slack[k] = c_k`` and ``upper_slack[k] = 4/pi^2 - c_k``; a
    coefficient fails when either slack is below ``-tolerance[k]``.
    """

    lower_slack: np.ndarray
    upper_slack: np.ndarray
    tolerance: np.ndarray
    passed: np.ndarray
    cap: float = COEFFICIENT_CAP

    @property
    def verdict(self) -> bool:
        return bool(np.all(self.passed))

    @property
    def failures(self) -> list[int]:
        return [int(k) for k in np.nonzero(~self.passed)[0]]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "verdict": "pass" if self.verdict else "fail",
            "cap": self.cap,
            "failures": self.failures,
            "coefficients": [
                {"k": k, "lower_slack": float(lo), "upper_slack": float(hi), "tolerance": float(tol), "pass": bool(p)}
                for k, (lo, hi, tol, p) in enumerate(zip(self.lower_slack, self.upper_slack, self.tolerance, self.passed))
            ],
        }


def check_fourier_bounds(s: FourierSpectrum, stat_tol=0.0, *, n_sigma: float | None = None,
                         abs_tol: float = 1e-12) -> BoundCheckReport:
    """Flag coefficients below ``-tol`` or above ``4/pi^2 + tol``.

    ``stat_tol`` may be a scalar or a per-coefficient array. With
    ``n_sigma`` set, the spectrum's own standard errors scaled by
    ``n_sigma`` are used instead. ``abs_tol`` absorbs quadrature rounding
    (structurally zero coefficients come out as +-1e-18).
    """
    c = s.coefficients
    if n_sigma is not None:
        se = s.std_err if s.std_err is not None else np.zeros_like(c)
        tol = n_sigma * se + abs_tol
    else:
        tol = np.broadcast_to(np.asarray(stat_tol, dtype=float), c.shape) + abs_tol
    lower = c.copy()
    upper = COEFFICIENT_CAP - c
    passed = (lower >= -tol) & (upper >= -tol)
    return BoundCheckReport(lower, upper, np.array(tol, dtype=float), passed)


def _same_grid(C: CorrelationFunction, D: CorrelationFunction) -> None:
    if C.n != D.n or not np.allclose(C.t, D.t, rtol=0, atol=1e-12):
        raise GridError("correlation functions are sampled on different grids")


def l2_inner(C: CorrelationFunction, D: CorrelationFunction) -> float:
    """``(1/2pi) int_0^{2pi} C D dt`` by the periodic rectangle rule."""
    _same_grid(C, D)
    C.require_quadrature_grid()
    return float(np.mean(C.values * D.values))


def l2_norm(C: CorrelationFunction) -> float:
    return math.sqrt(l2_inner(C, C))


def l2_distance(C: CorrelationFunction, D: CorrelationFunction) -> float:
    _same_grid(C, D)
    C.require_quadrature_grid()
    return math.sqrt(float(np.mean((C.values - D.values) ** 2)))


def half_period_distance(theta, values, target: Callable = np.cos) -> float:
    """``sqrt((1/pi) int_0^pi (C - target)^2)`` by the trapezoid rule on any grid over [0, pi].

    For even functions this equals the full-period distance.
    """
    theta = np.asarray(theta, dtype=float)
    diff2 = (np.asarray(values, dtype=float) - target(theta)) ** 2
    return math.sqrt(float(np.trapezoid(diff2, theta)) / math.pi)


def cosine_function(n: int) -> CorrelationFunction:
    return CorrelationFunction.from_function(np.cos, n, label="cos")


def distance_bound_from_c1(c1: float) -> float:
    """Length ``|1 - 2 c1| / sqrt(2)`` of the part of ``C - cos`` along ``cos``."""
    return abs(1.0 - 2.0 * c1) / math.sqrt(2.0)


def distance_standard_error(C: CorrelationFunction, target: CorrelationFunction | None = None) -> float:
    """Delta-method standard error of ``||C - target||`` from the sample covariance."""
    if target is None:
        target = cosine_function(C.n)
    _same_grid(C, target)
    d = l2_distance(C, target)
    if d == 0.0:
        return math.sqrt(float(np.mean(np.diag(C.error_covariance)))) if np.any(C.std_err) else 0.0
    grad = (C.values - target.values) / (C.n * d)
    return math.sqrt(max(0.0, float(grad @ C.error_covariance @ grad)))


@dataclass(frozen=True)
class DistanceReport:
    """L2 comparison of a correlation function with ``cos``."""

    norm_squared: float
    c1: float
    distance: float
    bound: float
    margin: float
    projection_bound: float
    decomposition_residual: float
    c1_within_cap: bool
    distance_std_err: float = 0.0
    c0: float = 0.0
    c1_std_err: float = 0.0

    @property
    def decomposition_holds(self) -> bool:
        """``||C - cos||^2 >= (1 - 2 c1)^2 / 2`` up to rounding."""
        return self.distance**2 >= self.projection_bound**2 - 1e-12

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "norm_squared": self.norm_squared,
            "c0": self.c0,
            "c1": self.c1,
            "c1_std_err": self.c1_std_err,
            "distance": self.distance,
            "distance_std_err": self.distance_std_err,
            "bound": self.bound,
            "margin": self.margin,
            "projection_bound": self.projection_bound,
            "decomposition_residual": self.decomposition_residual,
            "decomposition_holds": self.decomposition_holds,
            "c1_within_cap": self.c1_within_cap,
        }


def bound_margin(C: CorrelationFunction, c1_tol: float = 1e-6, n_sigma: float = 5.0) -> DistanceReport:
    """Distance of ``C`` to ``cos`` against the ``(1 - 8/pi^2)/sqrt(2)`` bound.

    ``decomposition_residual`` is ``||C-cos||^2 - (||C||^2 + 1/2 - 2 c1)``,
    which vanishes identically on the grid. ``c1_within_cap`` allows
    ``c1_tol`` of quadrature error plus ``n_sigma`` standard errors for
    Monte Carlo input.
    """
    C.require_quadrature_grid()
    cos_f = cosine_function(C.n)
    norm2 = l2_inner(C, C)
    c1 = l2_inner(cos_f, C)
    c0 = float(np.mean(C.values))
    dist = l2_distance(C, cos_f)
    residual = dist**2 - (norm2 + l2_inner(cos_f, cos_f) - 2.0 * c1)
    se = c1_se = 0.0
    if np.any(C.std_err):
        se = distance_standard_error(C, cos_f)
        w = cos_f.values / C.n
        c1_se = math.sqrt(max(0.0, float(w @ C.error_covariance @ w)))
    tol = c1_tol + n_sigma * c1_se
    return DistanceReport(
        norm_squared=norm2,
        c1=c1,
        distance=dist,
        bound=DISTANCE_BOUND,
        margin=dist - DISTANCE_BOUND,
        projection_bound=distance_bound_from_c1(c1),
        decomposition_residual=residual,
        c1_within_cap=bool(-tol <= c1 <= COEFFICIENT_CAP + tol),
        distance_std_err=se,
        c0=c0,
        c1_std_err=c1_se,
    )


def continuity_modulus_check(C: CorrelationFunction, eps_steps: int) -> float:
    """Worst slack of ``|C(t+e) - C(t)|^2 <= 2 (C(0) - C(e))`` over the grid.

    ``e = eps_steps * 2pi/N``. Non-positive for any correlation function of a
    +-1 process; positive values flag an impossible correlation.
    """
    C.require_quadrature_grid()
    if eps_steps < 1:
        raise ValueError("eps_steps must be >= 1")
    v = C.values
    shifted = np.roll(v, -eps_steps)
    lhs = (shifted - v) ** 2
    rhs = 2.0 * (v[0] - v[eps_steps % C.n])
    return float(np.max(lhs - rhs))


@dataclass(frozen=True)
class InequalityResult:
    lhs: float
    rhs: float
    satisfied: bool
    std_err: float = 0.0

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "std_err": self.std_err, "satisfied": self.satisfied}


def bell_inequality_check(C: CorrelationFunction, theta1: float, theta2: float,
                          tol: float = 1e-12, n_sigma: float = 5.0) -> InequalityResult:
    """Bell's inequality ``|C(t1) - C(t1+t2)| <= 1 - C(t2)`` for a coplanar triple.

    The triple is ``a, b, c`` on a great circle with ``angle(a,b) = t1``,
    ``angle(b,c) = t2``. Noisy input is judged within ``n_sigma`` standard
    errors of ``rhs - lhs``.
    """
    if theta1 < 0 or theta2 < 0 or theta1 + theta2 > math.pi + 1e-12:
        raise AngleRangeError("need theta1, theta2 >= 0 and theta1 + theta2 <= pi")
    c_ab, c_ac, c_bc = (float(x) for x in C.evaluate(np.array([theta1, theta1 + theta2, theta2])))
    lhs = abs(c_ab - c_ac)
    rhs = 1.0 - c_bc
    se = 0.0
    if np.any(C.std_err):
        sign = 1.0 if c_ab >= c_ac else -1.0
        se = _combined_se(C, [theta1, theta1 + theta2, theta2], np.array([sign, -sign, 1.0]))
    return InequalityResult(lhs, rhs, lhs <= rhs + tol + n_sigma * se, se)


def _combined_se(C: CorrelationFunction, thetas, grad: np.ndarray) -> float:
    """Standard error of ``grad . (C(theta_i))``."""
    idx = [C.index_of(t) for t in thetas]
    if all(i is not None for i in idx):
        cov = C.error_covariance[np.ix_(idx, idx)]
        return math.sqrt(max(0.0, float(grad @ cov @ grad)))
    # off-grid: interpolated errors, correlations unknown, so add magnitudes
    return float(np.abs(grad) @ np.array([C.std_err_at(t) for t in thetas]))


def chsh_value(E: Callable[[float], float], a: float, a2: float, b: float, b2: float) -> float:
    """``E(|a-b|) - E(|a-b2|) + E(|a2-b|) + E(|a2-b2|)``.

    ``E`` is the pair expectation ``<f_a g_b>`` as a function of analyzer
    separation; classical models give ``|S| <= 2``, the singlet ``2 sqrt 2``.
    """
    return E(abs(a - b)) - E(abs(a - b2)) + E(abs(a2 - b)) + E(abs(a2 - b2))


def pair_expectation_from(C: CorrelationFunction) -> Callable[[float], float]:
    """``E(theta) = -C(theta)`` (partner response is ``g = -f``)."""
    return lambda theta: -float(C.evaluate(float(reduce_angle(theta))))


__all__ = [
    "COEFFICIENT_CAP",
    "DISTANCE_BOUND",
    "AliasingError",
    "AngleRangeError",
    "BoundCheckReport",
    "DistanceReport",
    "FourierSpectrum",
    "InequalityResult",
    "bell_inequality_check",
    "check_fourier_bounds",
    "chsh_value",
    "continuity_modulus_check",
    "cosine_function",
    "distance_bound_from_c1",
    "distance_standard_error",
    "fourier_coefficients",
    "full_spectrum",
    "half_period_distance",
    "l2_distance",
    "l2_inner",
    "l2_norm",
    "pair_expectation_from",
    "parseval_residual",
    "bound_margin",
    "reconstruct_from_spectrum",
]
