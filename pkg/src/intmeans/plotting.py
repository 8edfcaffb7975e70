"""Figure of the computed bound against the two trivial support lines."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .optimizer import SpectrumTable  # noqa: E402


def render_figure(table: SpectrumTable, path) -> None:
    """Write a PNG of B_*(t) with B = -t-1 and B = 3t-1; deterministic bytes."""
    ts = [r.t for r in table.rows]
    bs = [r.beta for r in table.rows]
    lo, hi = (min(ts), max(ts)) if ts else (-1.0, 1.0)
    fig, ax = plt.subplots(figsize=(6, 4.5), dpi=100)
    ax.plot(ts, bs, "k-", lw=1.2, label="B*(t)")
    ax.plot([lo, -1], [-lo - 1, 0], "k--", lw=0.8, label="-t-1")
    ax.plot([1 / 3, hi], [0, 3 * hi - 1], "k:", lw=0.8, label="3t-1")
    ax.axhline(0, color="0.6", lw=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("B")
    ax.legend(loc="upper center", frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
