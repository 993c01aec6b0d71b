"""Optional figures rendered next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from dissproj.xp.experiments import SweepResult


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render(result: SweepResult, path) -> Path:
    """Draw a quick-look figure for ``result`` and save it as PNG."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    kind = result.experiment
    if kind == "scaling":
        x, y = result.column("inv_T"), result.column("distance")
        ax.plot(x, y, "o-", label="t = T")
        if "distance_sup" in result.columns:
            ax.plot(x, result.column("distance_sup"), "s--", label="sup over grid")
            ax.legend(frameon=False)
        ax.set_xlabel("1/T")
        ax.set_ylabel("distance")
    elif kind == "spectrum":
        th = np.linspace(0, 2 * np.pi, 200)
        ax.plot(np.cos(th), np.sin(th), color="0.7", lw=0.8)
        for T, eigs in result.extra["eigenvalues"].items():
            e = np.array(eigs).reshape(-1, 2)
            ax.plot(e[:, 0], e[:, 1], ".", label=f"T = {float(T):g}")
        ax.set_aspect("equal")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.legend(frameon=False, fontsize=7)
    elif kind == "trace":
        ax.plot(result.column("re"), result.column("im"), lw=1)
        ax.set_aspect("equal")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
    elif kind == "holonomy":
        ax.loglog(result.column("n"), result.column("deviation"), "o-")
        ax.set_xlabel("n")
        ax.set_ylabel("deviation")
    elif kind == "kato":
        x = result.column("x")
        ax.loglog(x, result.column("lhs"), "o-", label="measured")
        ax.loglog(x, result.column("rhs"), "s--", label="bound")
        ax.set_xlabel("x")
        ax.legend(frameon=False)
    else:
        names = [str(v) for v in result.column("name")]
        ax.bar(names, result.column("effective_difference").astype(float))
        ax.set_ylabel("effective difference")
        ax.tick_params(axis="x", rotation=45)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
