"""Figure rendering for scan and estimate reports.

Figures are a convenience layer next to the CSV/JSON outputs (which stay the
machine-readable source of truth); everything is rendered headless to files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .numeric import log_fraction


def _log10_h(record) -> float:
    return log_fraction(record.height_sq) / (2 * math.log(10))


def _neg_log10_psi(record) -> tuple[float, float]:
    lo = -log_fraction(record.psi_hi) / math.log(10)
    hi = -log_fraction(record.psi_lo) / math.log(10) if record.psi_lo > 0 else lo
    return lo, hi


def scan_figure(records: Sequence, path: Path, title: str = "best-approximation scan") -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    xs = [_log10_h(r) for r in records]
    ys = [0.5 * (r.score_lo + min(r.score_hi, r.score_lo + 1)) for r in records]
    front = [r.on_frontier for r in records]
    ax.scatter(
        [x for x, f in zip(xs, front) if not f],
        [y for y, f in zip(ys, front) if not f],
        s=14, c="#7a7a7a", label="records",
    )
    ax.scatter(
        [x for x, f in zip(xs, front) if f],
        [y for y, f in zip(ys, front) if f],
        s=26, c="#b3413c", label="Pareto frontier",
    )
    ax.set_xlabel("log10 H(B)")
    ax.set_ylabel("score  -log psi / log H")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130, metadata={"Software": "subdioph"})
    plt.close(fig)


def family_figure(
    records: Sequence,
    slope_interval: tuple[float, float],
    predicted: float | None,
    path: Path,
    title: str = "approximant family",
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    xs = [_log10_h(r) for r in records]
    ys = [0.5 * sum(_neg_log10_psi(r)) for r in records]
    ax.scatter(xs, ys, s=24, c="#2a5d9c", label="family records")
    if xs:
        x0, x1 = min(xs), max(xs)
        xbar = sum(xs) / len(xs)
        ybar = sum(ys) / len(ys)
        mid = 0.5 * (slope_interval[0] + slope_interval[1])
        ax.plot(
            [x0, x1],
            [ybar + mid * (x0 - xbar), ybar + mid * (x1 - xbar)],
            c="#2a5d9c", lw=1, label=f"fitted slope {mid:.3f}",
        )
        if predicted is not None:
            ax.plot(
                [x0, x1],
                [ybar + predicted * (x0 - xbar), ybar + predicted * (x1 - xbar)],
                c="#b3413c", lw=1, ls="--", label=f"predicted {predicted:.3f}",
            )
    ax.set_xlabel("log10 H(B)")
    ax.set_ylabel("-log10 psi")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130, metadata={"Software": "subdioph"})
    plt.close(fig)
