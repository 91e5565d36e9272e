"""Figures written to files; never opens a window."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402


def cost_scatter(rows: Sequence[dict], out: str | Path, title: str = "") -> Path:
    """Initial versus final plan cost per instance, with the diagonal for reference.

    Instances whose final cost was proven optimal are drawn filled.
    """
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    initial = [r["initial_cost"] for r in rows]
    final = [r["final_cost"] for r in rows]
    proven = [bool(r["optimal_proven"]) for r in rows]
    top = max(initial + final + [1])
    ax.plot([0, top], [0, top], color="0.6", lw=0.8, ls="--", zorder=1)
    for flag, style in ((True, dict(facecolors="C0", label="optimal proven")),
                        (False, dict(facecolors="none", label="not proven"))):
        xs = [x for x, p in zip(initial, proven) if p == flag]
        ys = [y for y, p in zip(final, proven) if p == flag]
        if xs:
            ax.scatter(xs, ys, s=22, edgecolors="C0", zorder=2, **style)
    ax.set_xlabel("initial plan cost")
    ax.set_ylabel("final plan cost")
    pad = max(0.3, top * 0.05)
    ax.set_xlim(-pad, top + pad)
    ax.set_ylim(-pad, top + pad)
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.yaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    if rows:
        ax.legend(frameon=False, fontsize="small")
    fig.tight_layout()
    out = Path(out)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def cost_trace(costs: Sequence[int], out: str | Path, proven: bool = False) -> Path:
    """Incumbent cost after each improving round."""
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.step(range(len(costs)), costs, where="post", marker="o", ms=4)
    ax.set_xlabel("improvement")
    ax.set_ylabel("plan cost")
    ax.set_title("optimal" if proven else "not proven optimal", fontsize="small")
    ax.set_ylim(bottom=0)
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.yaxis.set_major_locator(MaxNLocator(integer=True))
    fig.tight_layout()
    out = Path(out)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
