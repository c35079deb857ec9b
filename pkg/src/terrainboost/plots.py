"""Benchmark figure rendering (log-loss vs training size, one line per method)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import BenchRow, summarize

_STYLE = {
    "one_hot": dict(color="tab:blue", marker="o", label="One-Hot"),
    "ordinal": dict(color="tab:orange", marker="s", label="Ordinal"),
    "structured": dict(color="tab:green", marker="^", label="Structured"),
    "siloed": dict(color="tab:red", marker="d", label="Siloed"),
    "optimal": dict(color="black", linestyle="--", label="Optimal"),
}


def render_benchmark_figure(rows: list[BenchRow], path) -> None:
    """Render mean test log-loss per method over training size to an image file."""
    means = summarize(rows)
    methods = []
    for row in rows:
        if row.method not in methods:
            methods.append(row.method)
    sizes = sorted({row.size for row in rows})

    fig, ax = plt.subplots(figsize=(7, 5))
    for method in methods:
        ys = [means[(method, s)] for s in sizes if (method, s) in means]
        xs = [s for s in sizes if (method, s) in means]
        style = _STYLE.get(method, dict(label=method))
        ax.plot(xs, ys, **style)
    ax.set_xscale("log")
    ax.set_xlabel("training set size")
    ax.set_ylabel("mean test log-loss")
    ax.set_title("Categorical-handling comparison on synthetic rain data")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
