"""Figure rendering for run traces.

Three PNGs per trace, written next to the CSV output:

* ``<prefix>_objective.png``  objective value per iteration, with the
  certified stop index marked when defined,
* ``<prefix>_proximity.png``  constraint violation (proximity) per
  iteration,
* ``<prefix>_steps.png``      step residuals against the step-size
  schedule on a log scale — the residuals must stay under the schedule.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_figures"]


def _mark_out(ax, footer):
    if footer.K is not None:
        ax.axvline(footer.K, color="tab:red", linestyle="--", linewidth=1.0,
                   label=f"OUT index K={footer.K}")
        ax.legend(loc="best", fontsize=8)


def render_figures(rows, footer, out_prefix: str) -> list:
    """Render the three standard figures; returns the written paths."""
    ks = np.array([r.k for r in rows])
    fs = np.array([r.f for r in rows])
    proxes = np.array([r.prox for r in rows])
    residuals = np.array([r.residual for r in rows])
    alphas = np.array([r.alpha for r in rows])
    paths = []

    fig, ax = plt.subplots(figsize=(6.0, 3.6), dpi=120)
    ax.plot(ks, fs, color="tab:blue", linewidth=1.2)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("objective value")
    ax.set_title("Objective along the run")
    _mark_out(ax, footer)
    fig.tight_layout()
    path = f"{out_prefix}_objective.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 3.6), dpi=120)
    ax.plot(ks, proxes, color="tab:green", linewidth=1.2)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("proximity")
    ax.set_title("Constraint violation along the run")
    _mark_out(ax, footer)
    fig.tight_layout()
    path = f"{out_prefix}_proximity.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 3.6), dpi=120)
    pos = residuals > 0
    if pos.any():
        ax.semilogy(ks[pos], residuals[pos], ".", color="tab:orange", markersize=3,
                    label="step residual")
    ax.semilogy(ks, alphas, color="tab:gray", linewidth=1.0, label="step size")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("magnitude")
    ax.set_title("Step residuals vs. schedule")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = f"{out_prefix}_steps.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    return paths
