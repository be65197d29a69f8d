"""Figure rendering for CLI reports.

Uses the object-oriented matplotlib API with the Agg canvas so no display
or global pyplot state is involved.
"""

from __future__ import annotations

import math

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .analysis import COEFFICIENT_CAP, DISTANCE_BOUND

FIGSIZE = (6.4, 4.0)


def _save(fig: Figure, path) -> None:
    FigureCanvasAgg(fig)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})


def _new(xlabel: str, ylabel: str):
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot(111)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def plot_correlation(C, path, title: str = "") -> None:
    """Samples with error bars against ``cos`` and the triangle ``1 - 2|t|/pi``."""
    fig, ax = _new("t [rad]", "C(t)")
    t = np.linspace(0.0, 2.0 * math.pi, 721)
    ax.plot(t, np.cos(t), color="k", lw=1.0, label="cos t")
    tri = 1.0 - 2.0 * np.abs(np.where(t > math.pi, t - 2 * math.pi, t)) / math.pi
    ax.plot(t, tri, color="0.6", lw=1.0, ls="--", label="1 - 2|t|/pi")
    if np.any(C.std_err):
        ax.errorbar(C.t, C.values, yerr=C.std_err, fmt="o", ms=3, capsize=2, label=C.label or "samples")
    else:
        ax.plot(C.t, C.values, "o", ms=2, label=C.label or "samples")
    ax.set_xlim(0.0, 2.0 * math.pi)
    ax.set_ylim(-1.1, 1.1)
    ax.legend(loc="upper center", fontsize=8)
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_spectrum(s, path, title: str = "") -> None:
    fig, ax = _new("k", "c_k")
    k = np.arange(s.k_max + 1)
    ax.bar(k, s.coefficients, width=0.6, color="C0")
    if s.std_err is not None:
        ax.errorbar(k, s.coefficients, yerr=s.std_err, fmt="none", ecolor="k", capsize=2)
    ax.axhline(COEFFICIENT_CAP, color="C3", ls="--", lw=1.0, label="4/pi^2")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_verdict(v, path) -> None:
    fig, ax = _new("theta [rad]", "anticorrelation")
    th = np.linspace(0.0, math.pi, 361)
    ax.plot(th, np.cos(th), color="k", lw=1.0, label="cos")
    ax.errorbar(v.theta, v.c_hat, yerr=v.std_err, fmt="o", ms=3, capsize=2, label="estimate")
    ax.set_title(f"D = {v.distance:.5f} [{v.ci_low:.5f}, {v.ci_high:.5f}]  threshold {v.threshold:.5f}: {v.verdict}",
                 fontsize=9)
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_approach(points, path) -> None:
    fig, ax = _new("k_max", "min ||C - cos||")
    k = [p[0] for p in points]
    d = [p[1] for p in points]
    ax.semilogx(k, d, "o-", label="relaxation optimum")
    ax.axhline(DISTANCE_BOUND, color="C3", ls="--", lw=1.0, label="(1 - 8/pi^2)/sqrt 2")
    ax.legend(fontsize=8)
    _save(fig, path)
