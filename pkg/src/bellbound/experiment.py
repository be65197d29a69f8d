"""Coincidence-count datasets and the distance-based locality test.

If the mean-square distance between measured anticorrelations and ``cos``
is, at a given confidence level, below ``(1 - 8/pi^2)/sqrt(2)``, no local
hidden-variable model can have produced the data at that level.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import DISTANCE_BOUND, SCHEMA_VERSION
from .models import LocalHiddenVariableModel, sample_counts
from .quantum import singlet_cell_probabilities
from .streams import make_rng

DATASET_HEADER = ("theta_rad", "n_pp", "n_pm", "n_mp", "n_mm")
MIN_ANGLES = 8
#: Largest allowed gap between [0, pi] endpoints and the outermost angles.
MAX_ENDPOINT_GAP = math.pi / 16
COVERAGE_NOTE = (f"coverage policy: at least {MIN_ANGLES} angles with the first within "
                 f"pi/16 of 0 and the last within pi/16 of pi")


class DatasetError(ValueError):
    """Parse or validation failure for a coincidence dataset."""


class CoverageError(DatasetError):
    """Too few angles, or angles not spanning [0, pi], for the distance quadrature."""


@dataclass(frozen=True)
class ExperimentalDataset:
    """Per-angle coincidence counts in outcome order (++, +-, -+, --)."""

    theta: np.ndarray
    counts: np.ndarray
    source: str = ""

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        counts = np.array(self.counts, dtype=np.int64)
        if theta.ndim != 1 or counts.shape != (len(theta), 4):
            raise DatasetError("need one row of four counts per angle")
        if len(theta) == 0:
            raise DatasetError("empty dataset")
        if not np.all(np.isfinite(theta)):
            raise DatasetError("invariant violated: angles must be finite")
        if np.any(counts < 0):
            raise DatasetError("invariant violated: counts must be non-negative")
        if np.any(counts.sum(axis=1) < 1):
            raise DatasetError("invariant violated: each row needs a total count >= 1")
        if np.any(np.diff(theta) <= 0):
            raise DatasetError("invariant violated: angles must be strictly increasing")
        if theta[0] < 0 or theta[-1] > math.pi + 1e-12:
            raise DatasetError("invariant violated: angles must lie in [0, pi]")
        theta.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "counts", counts)

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def __len__(self) -> int:
        return len(self.theta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(DATASET_HEADER)
        for t, row in zip(self.theta, self.counts):
            w.writerow([format(float(t), ".17g"), *(int(x) for x in row)])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def parse_dataset(text: str, source: str = "") -> ExperimentalDataset:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(i, r) for i, r in enumerate(rows, start=1) if r and any(c.strip() for c in r)]
    if not rows:
        raise DatasetError("empty dataset: file has no content")
    lineno, header = rows[0]
    if tuple(h.strip() for h in header) != DATASET_HEADER:
        raise DatasetError(f"line {lineno}: expected header {','.join(DATASET_HEADER)}")
    theta, counts = [], []
    for lineno, row in rows[1:]:
        if len(row) != 5:
            raise DatasetError(f"line {lineno}: expected 5 columns, got {len(row)}")
        try:
            t = float(row[0])
        except ValueError:
            raise DatasetError(f"line {lineno}: bad angle {row[0]!r}") from None
        if not math.isfinite(t):
            raise DatasetError(f"line {lineno}: angle is not finite")
        try:
            c = [int(x.strip()) for x in row[1:]]
        except ValueError:
            raise DatasetError(f"line {lineno}: counts must be integers") from None
        if any(x < 0 for x in c):
            raise DatasetError(f"line {lineno}: invariant violated: negative count")
        theta.append(t)
        counts.append(c)
    if not theta:
        raise DatasetError("empty dataset: no data rows")
    return ExperimentalDataset(np.array(theta), np.array(counts), source)


def load_dataset(path) -> ExperimentalDataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"), source=str(path))


def _expectations(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum(axis=-1)
    e = (counts[..., 0] + counts[..., 3] - counts[..., 1] - counts[..., 2]) / n
    return e, n


def estimate_anticorrelation(d: ExperimentalDataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-angle ``C = -E`` with ``E = (n_pp + n_mm - n_pm - n_mp)/n`` and ``sigma = sqrt((1 - E^2)/n)``."""
    e, n = _expectations(d.counts)
    return -e, np.sqrt(np.maximum(0.0, 1.0 - e * e) / n)


def check_coverage(theta: np.ndarray) -> None:
    if len(theta) < MIN_ANGLES:
        raise CoverageError(f"insufficient angular coverage: {len(theta)} angles, need >= {MIN_ANGLES}")
    if theta[0] > MAX_ENDPOINT_GAP or math.pi - theta[-1] > MAX_ENDPOINT_GAP:
        raise CoverageError("insufficient angular coverage: angles must span [0, pi] to within pi/16")


def distance_to_cos(theta: np.ndarray, c_hat: np.ndarray) -> np.ndarray:
    """Trapezoid estimate of ``sqrt((1/pi) int_0^pi (C - cos)^2)``; ``c_hat`` may carry leading batch axes."""
    diff2 = (np.asarray(c_hat) - np.cos(theta)) ** 2
    return np.sqrt(np.trapezoid(diff2, theta, axis=-1) / math.pi)


@dataclass(frozen=True)
class TestVerdict:
    theta: np.ndarray
    c_hat: np.ndarray
    std_err: np.ndarray
    distance: float
    ci_low: float
    ci_high: float
    alpha: float
    bootstrap_b: int
    threshold: float = DISTANCE_BOUND

    __test__ = False  # not a pytest class

    @property
    def verdict(self) -> str:
        return "ruled-out" if self.ci_high < self.threshold else "inconclusive"

    @property
    def ruled_out(self) -> bool:
        return self.verdict == "ruled-out"

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "verdict": self.verdict,
            "distance": self.distance,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence_level": 1.0 - self.alpha,
            "alpha": self.alpha,
            "bootstrap": self.bootstrap_b,
            "threshold": self.threshold,
            "coverage_note": COVERAGE_NOTE,
            "angles": [
                {"theta_rad": float(t), "c_hat": float(c), "std_err": float(s)}
                for t, c, s in zip(self.theta, self.c_hat, self.std_err)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def hypothesis_test(d: ExperimentalDataset, bootstrap_b: int = 1000, alpha: float = 0.05,
                    seed: int = 0) -> TestVerdict:
    """Bootstrap test of ``distance(C_hat, cos) < (1 - 8/pi^2)/sqrt(2)``.

    Counts are resampled per row from the multinomial with the observed
    frequencies; the ``(1 - alpha)`` percentile interval of the resampled
    distances decides the verdict through its upper limit.
    """
    if bootstrap_b < 1:
        raise ValueError("bootstrap count must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    check_coverage(d.theta)
    c_hat, se = estimate_anticorrelation(d)
    dist = float(distance_to_cos(d.theta, c_hat))
    rng = make_rng(seed)
    freqs = d.counts / d.totals[:, None]
    boot = np.empty((bootstrap_b, len(d)))
    for j, (n, p) in enumerate(zip(d.totals, freqs)):
        e, _ = _expectations(rng.multinomial(int(n), p, size=bootstrap_b))
        boot[:, j] = -e
    dists = distance_to_cos(d.theta, boot)
    lo, hi = np.quantile(dists, [alpha / 2.0, 1.0 - alpha / 2.0])
    return TestVerdict(d.theta, c_hat, se, dist, float(lo), float(hi), alpha, bootstrap_b)


def synthesize_dataset(theta: Sequence[float], n: int, seed: int,
                       model: LocalHiddenVariableModel | None = None, source: str = "") -> ExperimentalDataset:
    """Counts drawn per angle from the singlet distribution, or from ``model``'s joint distribution."""
    theta = np.asarray(theta, dtype=float)
    probs = singlet_cell_probabilities(theta) if model is None else model.cell_probabilities(theta)
    counts = sample_counts(probs, n, make_rng(seed))
    return ExperimentalDataset(theta, counts, source or ("quantum" if model is None else model.name))
