"""Figure rendering for sweep output.

Figures are written as SVG with a fixed hash salt and no embedded date, so
rendering the same CSV twice produces byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import load_rows

_SVG_SALT = "wslab"


def _configure():
    matplotlib.rcParams["svg.hashsalt"] = _SVG_SALT


def plot_success_rates(csv_path, out_path, title: str = None) -> dict:
    """Success rate vs clause density, one line per (k, n), with the Wilson
    interval shaded.  Returns {(k, n): (alphas, rates)} for inspection.
    An empty CSV still yields a valid figure with empty axes."""
    _configure()
    rows = load_rows(csv_path)
    groups = {}
    for row in rows:
        groups.setdefault((row.k, row.n), []).append(row)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    series = {}
    for key in sorted(groups):
        cells = sorted(groups[key], key=lambda r: r.alpha)
        alphas = [r.alpha for r in cells]
        rates = [r.success_rate for r in cells]
        low = [r.wilson_low for r in cells]
        high = [r.wilson_high for r in cells]
        k, n = key
        (line,) = ax.plot(alphas, rates, marker="o", markersize=3.5,
                          label=f"k={k}, n={n}")
        ax.fill_between(alphas, low, high, alpha=0.2, color=line.get_color(),
                        linewidth=0)
        series[key] = (alphas, rates)

    ax.set_xlabel("clause density m/n")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    if series:
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    save_svg(fig, out_path)
    plt.close(fig)
    return series


def plot_steps(csv_path, out_path, title: str = None) -> dict:
    """Mean flips of successful runs vs density, log scale, per (k, n)."""
    _configure()
    rows = load_rows(csv_path)
    groups = {}
    for row in rows:
        groups.setdefault((row.k, row.n), []).append(row)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    series = {}
    for key in sorted(groups):
        cells = sorted(groups[key], key=lambda r: r.alpha)
        pts = [(r.alpha, r.mean_steps_success) for r in cells
               if r.mean_steps_success == r.mean_steps_success]  # drop nan
        if not pts:
            continue
        alphas = [p[0] for p in pts]
        steps = [p[1] for p in pts]
        k, n = key
        ax.plot(alphas, steps, marker="o", markersize=3.5, label=f"k={k}, n={n}")
        series[key] = (alphas, steps)

    ax.set_xlabel("clause density m/n")
    ax.set_ylabel("mean flips (successful runs)")
    if series:
        ax.set_yscale("log")
        ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    save_svg(fig, out_path)
    plt.close(fig)
    return series


def save_svg(fig, out_path):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    # metadata Date=None keeps repeated renders byte-identical
    fig.savefig(out_path, format="svg", metadata={"Date": None})
