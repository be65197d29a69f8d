"""Sampled correlation functions on the circle and their file formats.

A :class:`CorrelationFunction` holds samples ``C(t_j)`` with per-sample
standard errors. Quadrature routines need the uniform grid
``t_j = 2 pi j / N`` with ``N`` a power of two; other grids (simulation on
arbitrary angles) are allowed but only support pointwise evaluation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

TWO_PI = 2.0 * math.pi
CSV_HEADER = ("t_rad", "c_value", "std_err")


class GridError(ValueError):
    """Raised when an operation needs a different sampling grid."""


class CorrelationFormatError(ValueError):
    """Raised for malformed correlation CSV files."""


def uniform_grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def reduce_angle(t):
    """Map angles to their equivalent in ``[0, pi]`` using evenness and 2pi periodicity."""
    r = np.mod(np.asarray(t, dtype=float), TWO_PI)
    return np.where(r > math.pi, TWO_PI - r, r)


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class CorrelationFunction:
    """Samples of an even, 2pi-periodic correlation function.

    ``covariance`` is the optional joint covariance of the sample estimates
    (Monte Carlo with shared hidden variables produces strongly correlated
    errors); when absent, errors are treated as independent.
    """

    t: np.ndarray
    values: np.ndarray
    std_err: np.ndarray
    exact: Optional[Callable] = field(default=None, compare=False)
    covariance: Optional[np.ndarray] = field(default=None, compare=False)
    n_samples: Optional[int] = None
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        se = np.zeros_like(v) if self.std_err is None else np.asarray(self.std_err, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or se.shape != v.shape:
            raise GridError("t, values and std_err must be 1-D arrays of equal length")
        if len(t) == 0:
            raise GridError("correlation function needs at least one sample")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v)) and np.all(np.isfinite(se))):
            raise ValueError("correlation samples must be finite")
        if np.any(se < 0):
            raise ValueError("standard errors must be non-negative")
        for name, arr in (("t", t), ("values", v), ("std_err", se)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.covariance is not None:
            cov = np.array(self.covariance, dtype=float)
            if cov.shape != (len(t), len(t)):
                raise GridError("covariance shape does not match the grid")
            cov.setflags(write=False)
            object.__setattr__(self, "covariance", cov)

    @classmethod
    def from_function(cls, func: Callable, n: int = 4096, label: str = "") -> "CorrelationFunction":
        """Sample a closed form on the uniform ``n``-point grid (zero standard errors)."""
        t = uniform_grid(n)
        return cls(t, np.asarray(func(t), dtype=float), np.zeros(n), exact=func, label=label)

    @classmethod
    def from_samples(cls, values, std_err=None, label: str = "") -> "CorrelationFunction":
        v = np.asarray(values, dtype=float)
        return cls(uniform_grid(len(v)), v, np.zeros_like(v) if std_err is None else std_err, label=label)

    @property
    def n(self) -> int:
        return len(self.t)

    @property
    def is_closed_form(self) -> bool:
        return self.exact is not None and not np.any(self.std_err)

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.t, uniform_grid(self.n), rtol=0, atol=1e-12))

    def require_quadrature_grid(self) -> None:
        if not self.is_uniform:
            raise GridError("quadrature needs samples on the uniform grid 2*pi*j/N")
        if not is_power_of_two(self.n):
            raise GridError(f"grid size {self.n} is not a power of two")

    @property
    def error_covariance(self) -> np.ndarray:
        if self.covariance is not None:
            return self.covariance
        return np.diag(self.std_err**2)

    def index_of(self, theta: float, tol: float = 1e-9) -> Optional[int]:
        """Grid index of ``theta`` (mod 2pi) if it is a sample point."""
        r = math.fmod(theta, TWO_PI)
        if r < 0:
            r += TWO_PI
        d = np.abs(self.t - r)
        d = np.minimum(d, TWO_PI - d)
        j = int(np.argmin(d))
        return j if d[j] <= tol else None

    def evaluate(self, theta) -> np.ndarray | float:
        """Value at arbitrary angles.

        Uses the closed form when present, the sample itself on grid points,
        and otherwise periodic linear interpolation between samples.
        """
        scalar = np.ndim(theta) == 0
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.exact is not None:
            out = np.asarray(self.exact(th), dtype=float)
        else:
            out = self._interp(th, self.values)
        return float(out[0]) if scalar else out

    def std_err_at(self, theta) -> np.ndarray | float:
        scalar = np.ndim(theta) == 0
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        out = self._interp(th, self.std_err)
        return float(out[0]) if scalar else out

    def _interp(self, th: np.ndarray, y: np.ndarray) -> np.ndarray:
        order = np.argsort(self.t)
        ts, ys = self.t[order], y[order]
        if self.n == 1:
            return np.full(th.shape, ys[0])
        # close the period so interpolation wraps around 2pi
        ts = np.concatenate([ts, [ts[0] + TWO_PI]])
        ys = np.concatenate([ys, [ys[0]]])
        r = np.mod(th, TWO_PI)
        r = np.where(r < ts[0], r + TWO_PI, r)
        return np.interp(r, ts, ys)

    def invariant_violations(self, n_sigma: float = 5.0, abs_tol: float = 1e-12) -> list[str]:
        """Check C(0) = 1, evenness and range; return descriptions of failures."""
        problems = []
        j0 = self.index_of(0.0)
        if j0 is not None:
            tol = n_sigma * self.std_err[j0] + abs_tol
            if abs(self.values[j0] - 1.0) > tol:
                problems.append(f"C(0) = {self.values[j0]!r} differs from 1")
        if self.is_uniform:
            j = np.arange(self.n)
            mirror = (-j) % self.n
            tol = n_sigma * np.hypot(self.std_err, self.std_err[mirror]) + abs_tol
            bad = np.nonzero(np.abs(self.values - self.values[mirror]) > tol)[0]
            if len(bad):
                problems.append(f"evenness violated at {len(bad)} grid points, first t={self.t[bad[0]]!r}")
        tol = n_sigma * self.std_err + abs_tol
        bad = np.nonzero((self.values > 1 + tol) | (self.values < -1 - tol))[0]
        if len(bad):
            problems.append(f"{len(bad)} samples outside [-1, 1]")
        return problems

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for t, c, s in zip(self.t, self.values, self.std_err):
            w.writerow((fmt17(t), fmt17(c), fmt17(s)))
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def from_csv(cls, text: str, label: str = "") -> "CorrelationFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise CorrelationFormatError("empty correlation file")
        header = tuple(h.strip() for h in rows[0])
        if header != CSV_HEADER:
            raise CorrelationFormatError(f"line 1: expected header {','.join(CSV_HEADER)}, got {','.join(header)}")
        data = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise CorrelationFormatError(f"line {lineno}: expected 3 columns, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise CorrelationFormatError(f"line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise CorrelationFormatError(f"line {lineno}: non-finite value")
            data.append(vals)
        if not data:
            raise CorrelationFormatError("correlation file has no data rows")
        arr = np.array(data)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], label=label)

    @classmethod
    def read_csv(cls, path) -> "CorrelationFunction":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"), label=str(path))


def covariance_path(csv_path) -> Path:
    """Sidecar file holding the estimate covariance of a correlation CSV."""
    p = Path(csv_path)
    return p.with_name(p.name + ".cov.csv")


def write_covariance(path, cov: np.ndarray) -> None:
    lines = [",".join(fmt17(x) for x in row) for row in np.asarray(cov)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_covariance(path, n: int) -> np.ndarray:
    rows = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    try:
        cov = np.array([[float(x) for x in line.split(",")] for line in rows])
    except ValueError as exc:
        raise CorrelationFormatError(f"{path}: {exc}") from None
    if cov.shape != (n, n):
        raise CorrelationFormatError(f"{path}: covariance shape {cov.shape} does not match {n} samples")
    return cov


def load_correlation(path, use_covariance: bool = True) -> CorrelationFunction:
    """Read a correlation CSV, attaching the covariance sidecar when present."""
    C = CorrelationFunction.read_csv(path)
    side = covariance_path(path)
    if use_covariance and side.exists():
        C = replace(C, covariance=read_covariance(side, C.n))
    return C
