"""Optional figures written next to the CSV output of the ``ensemble`` command."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _figure(width=6.0, height=None):
    golden = (math.sqrt(5) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, height or width * golden))
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    return fig, ax


def plot_sweep(stats, path, fit=None) -> None:
    """Mean fidelities against dimension, with 3-sigma error bars."""
    fig, ax = _figure()
    ds = np.array([s.d for s in stats])
    series = [("before", "before"), ("after_unitary", "best unitary"), ("after_qi", "quasi-inverse")]
    for key, label in series:
        ests = [getattr(s, key) for s in stats]
        if any(e is None for e in ests):
            continue
        ax.errorbar(ds, [e.mean for e in ests], yerr=[3 * e.se for e in ests], fmt="o-", ms=3,
                    capsize=2, label=label)
    if fit is not None:
        c, x = fit
        grid = np.linspace(ds.min(), ds.max(), 200)
        ax.plot(grid, c * grid**x, "k--", lw=1, label=f"{c:.3f} d^{x:.4f}")
    if len(ds) > 8:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("d")
    ax.set_ylabel("average fidelity")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_histogram(values, path, xlabel) -> None:
    fig, ax = _figure()
    ax.hist(np.asarray(values, float), bins=40, color="0.4")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_spin1(points, path) -> None:
    """Fidelity gain over the (p, tau0) grid as a filled contour map."""
    ps = sorted({pt.p for pt in points})
    taus = sorted({pt.tau0 for pt in points})
    gain = np.full((len(ps), len(taus)), np.nan)
    index = {(pt.p, pt.tau0): pt.delta for pt in points}
    for i, p in enumerate(ps):
        for j, t in enumerate(taus):
            gain[i, j] = index[(p, t)]
    fig, ax = _figure()
    if len(ps) > 1 and len(taus) > 1:
        cs = ax.contourf(taus, ps, gain, levels=20, cmap="viridis")
        fig.colorbar(cs, ax=ax, label="fidelity gain")
        ax.set_xlabel("tau0")
        ax.set_ylabel("p")
    else:
        ax.plot(taus if len(ps) == 1 else ps, gain.ravel(), "o-")
        ax.set_xlabel("tau0" if len(ps) == 1 else "p")
        ax.set_ylabel("fidelity gain")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
