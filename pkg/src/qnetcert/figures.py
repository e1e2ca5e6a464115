"""Figure rendering for scan reports.

Renders the certification sweep next to its CSV: Farkas margin on a log
scale where available, event probability below, points colored by verdict.
Files only; nothing interactive.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

VERDICT_COLORS = {
    "NONLOCAL": "#c62828",
    "INCONCLUSIVE": "#1565c0",
    "REFUSED": "#757575",
    "INDETERMINATE": "#ef6c00",
}


def render_scan_figure(rows, path, *, parameter_name: str = "theta") -> None:
    """Write a two-panel PNG for a list of sweep rows."""
    fig, (ax_margin, ax_prob) = plt.subplots(
        2, 1, figsize=(7.0, 5.6), sharex=True,
        gridspec_kw={"height_ratios": [2, 1]},
    )

    for verdict, color in VERDICT_COLORS.items():
        xs = [r.theta for r in rows if r.verdict == verdict]
        if not xs:
            continue
        ys = [r.margin if (r.verdict == "NONLOCAL" and r.margin) else None for r in rows if r.verdict == verdict]
        margin_x = [x for x, y in zip(xs, ys) if y is not None]
        margin_y = [y for y in ys if y is not None]
        if margin_y:
            ax_margin.plot(margin_x, margin_y, "o", color=color, label=verdict, markersize=5)
        else:
            # Verdicts without a margin sit on the axis floor for visibility.
            ax_margin.plot(xs, [float("nan")] * len(xs), "o", color=color, label=verdict, markersize=5)

    ax_margin.set_yscale("log")
    ax_margin.set_ylabel("Farkas margin")
    ax_margin.axhline(1e-7, color="0.6", linestyle=":", linewidth=1)
    ax_margin.legend(loc="best", fontsize=8)
    ax_margin.grid(True, which="both", alpha=0.25)

    for r in rows:
        ax_prob.plot([r.theta], [r.event_prob], "o", markersize=4,
                     color=VERDICT_COLORS.get(r.verdict, "black"))
    ax_prob.set_ylabel("event probability")
    ax_prob.set_xlabel(parameter_name)
    ax_prob.grid(True, alpha=0.25)

    fig.tight_layout()
    fig.savefig(path, dpi=130, metadata={"Software": "qnetcert"})
    plt.close(fig)
