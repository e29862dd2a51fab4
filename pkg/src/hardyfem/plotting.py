"""Static SVG renderings of the CSV artifacts (Agg backend, no display)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGSIZE = (6.0, 4.0)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_f_curve(m, F, target, threshold, path) -> Path:
    """Threshold function against the level ``A*H + lambda``."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(m, F, label="F(m)")
    ax.axhline(target, color="gray", ls="--", label="A H + lambda")
    if np.isfinite(threshold):
        ax.axvline(threshold, color="C3", ls=":", label=f"m = {threshold:.6g}")
    ax.set_xlabel("m")
    ax.set_ylabel("F")
    ax.legend()
    return _save(fig, path)


def plot_solution(r, u, path, exact=None) -> Path:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(r, u, label="u_h")
    if exact is not None:
        ax.plot(r, exact, ls="--", label="exact")
        ax.legend()
    ax.set_xscale("symlog", linthresh=1e-3)
    ax.set_xlabel("r")
    ax.set_ylabel("u")
    return _save(fig, path)


def plot_summability(report, path) -> Path:
    """m-th power integrals per refinement level on a log scale."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    integrals = np.asarray(report.integrals, dtype=float)
    for j, cut in enumerate(report.cutoffs):
        ax.semilogy(report.m_grid, integrals[j], marker="o", label=f"cutoff {cut:.0e}")
    if report.predicted_threshold is not None and np.isfinite(report.predicted_threshold):
        ax.axvline(report.predicted_threshold, color="gray", ls=":", label="predicted threshold")
    ax.set_xlabel("m")
    ax.set_ylabel("int |u|^m")
    ax.legend()
    return _save(fig, path)
