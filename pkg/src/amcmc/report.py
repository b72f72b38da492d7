"""Figure rendering for the report path: every CSV series gets a PNG twin."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .harness import RateFit, TvSeries


def plot_tv_series(series: TvSeries, path: str | Path,
                   fit: RateFit | None = None, title: str = "TV curve") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.errorbar(series.n, series.tv, yerr=series.stderr, fmt="o-", ms=4,
                lw=1, capsize=2, label="TV estimate")
    if series.noise_floor > 0:
        ax.axhline(series.noise_floor, color="gray", ls=":", lw=1,
                   label="noise floor")
    if fit is not None:
        xs = np.array(fit.window, dtype=float)
        ax.plot(xs, np.exp(fit.intercept) * xs ** fit.slope, "r--", lw=1.2,
                label=f"slope {fit.slope:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("TV distance to target")
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path


def plot_mse_series(ns, mse, stderr, path: str | Path,
                    title: str = "ergodic-average MSE") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.errorbar(ns, mse, yerr=stderr, fmt="s-", ms=4, lw=1, capsize=2)
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(r"mean of $(n^{-1/2}\sum (f(X_i) - \pi f))^2$")
    ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path


def plot_bound_series(ns, values, bound, path: str | Path,
                      value_label: str = "|E f(X_n) - pi(f)|",
                      bound_label: str = "fitted C / sqrt(n)",
                      title: str = "bias vs fitted bound") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.plot(ns, values, "o-", ms=4, lw=1, label=value_label)
    ax.plot(ns, bound, "r--", lw=1.2, label=bound_label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path
