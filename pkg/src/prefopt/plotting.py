"""SVG rendering of aggregated convergence curves (mean with a +-std band)."""

from __future__ import annotations

import matplotlib
import numpy as np
from matplotlib.figure import Figure

# fixed salt and no date stamp keep re-rendered files byte-identical
matplotlib.rcParams["svg.hashsalt"] = "prefopt"

LABELS = {
    "param_error": "policy parameter error",
    "cost_error": "cost value error",
    "grad_norm": "gradient norm",
}


def plot_metric(result, metric: str, path) -> None:
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    t = np.arange(result.config.optimizer_T + 1)
    for name in result.methods:
        mean = result.mean[name][metric]
        std = result.std[name][metric]
        positive = mean[mean > 0]
        floor = positive.min() * 1e-3 if positive.size else 1e-300
        (line,) = ax.plot(t, np.maximum(mean, floor), label=name, linewidth=1.2)
        ax.fill_between(t, np.maximum(mean - std, floor), np.maximum(mean + std, floor), color=line.get_color(), alpha=0.2, linewidth=0)
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel(LABELS.get(metric, metric))
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
