"""Render sweep results to an outage-probability figure.

The report path of the CLI saves a semilog PNG next to the CSV so a
sweep ends with both the numbers and the picture.  Analytic engines are
drawn as lines, Monte Carlo estimates as markers with their confidence
intervals.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_X_LABELS = {
    "p_tx_dbm": "transmit power (dBm)",
    "d_a": "terminal A to relay distance (m)",
    "beta": "harvesting fraction",
    "rate": "rate (bit/s/Hz)",
    "m_count": "quadrature node count",
}

_ENGINE_STYLE = {
    "quadrature": {"linestyle": "-"},
    "high_snr": {"linestyle": "--"},
}


def render_sweep_figure(rows, path) -> None:
    """Save a semilog outage plot of the sweep rows as an image file."""
    if not rows:
        raise ValueError("rows must be nonempty")

    series = {}
    for row in rows:
        series.setdefault((row.scheme, row.engine), []).append(row)

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for (scheme, engine), group in series.items():
        group = sorted(group, key=lambda r: r.value)
        x = np.array([r.value for r in group], dtype=float)
        y = np.array([r.p_out for r in group], dtype=float)
        # log axis cannot show exact zeros; drop those points
        shown = y > 0.0
        label = f"{scheme} ({engine})"
        if engine == "montecarlo":
            low = np.array([r.ci_low for r in group], dtype=float)
            high = np.array([r.ci_high for r in group], dtype=float)
            yerr = np.vstack([y - low, high - y])
            ax.errorbar(
                x[shown], y[shown], yerr=yerr[:, shown],
                fmt="o", markersize=4, capsize=2, linestyle="none", label=label,
            )
        else:
            ax.plot(x[shown], y[shown], label=label, **_ENGINE_STYLE.get(engine, {}))

    variable = rows[0].variable
    ax.set_yscale("log")
    ax.set_xlabel(_X_LABELS.get(variable, variable))
    ax.set_ylabel("system outage probability")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
