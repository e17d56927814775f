"""CSV, JSON, and figure emission for focusing runs.

CSV rows are formatted with 17 significant digits so repeated runs of the
same deterministic config produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path as FilePath

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .contact import FitReport, TrajectoryRecord

_FMT = "%.17g"


def trajectory_header(m: int) -> str:
    cols = (["t"]
            + [f"y{i + 1}" for i in range(m)]
            + [f"yref{i + 1}" for i in range(m)]
            + [f"phi{i + 1}" for i in range(m)]
            + ["h2_fro", "coupling_norm", "epsilon", "deviation"])
    return ",".join(cols)


def write_trajectory_csv(path, record: TrajectoryRecord) -> None:
    m = record.config.system.dim
    rows = np.column_stack([
        record.times, record.y, record.y_ref, record.phi,
        record.h2_fro, record.coupling_norm, record.epsilon, record.deviation,
    ])
    lines = [trajectory_header(m)]
    for row in rows:
        lines.append(",".join(_FMT % v for v in row))
    FilePath(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path, payload: dict) -> None:
    FilePath(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")


def render_focusing_figure(path, records: list[TrajectoryRecord],
                           fits: list[FitReport | None], sigma: float | None,
                           window: tuple[float, float]) -> None:
    """Two stacked panels: macroscopic y1 per case vs the dashed reference,
    and the log coupling norm per case with its fitted envelope line."""
    fig, (ax_top, ax_bot) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)

    for k, rec in enumerate(records):
        label = "phi0=(" + ", ".join(f"{v:g}" for v in rec.config.phi0) + ")"
        ax_top.plot(rec.times, rec.y[:, 0], lw=1.0, label=label)
    ax_top.plot(records[0].times, records[0].y_ref[:, 0], "k--", lw=1.2,
                label="reference")
    ax_top.set_ylabel("y1(t)")
    ax_top.legend(loc="upper right", fontsize=8)
    ax_top.grid(alpha=0.3)

    for k, rec in enumerate(records):
        positive = rec.coupling_norm > 0
        ax_bot.plot(rec.times[positive], np.log(rec.coupling_norm[positive]), lw=1.0)
        fit = fits[k] if k < len(fits) else None
        if fit is not None:
            t_line = np.linspace(window[0], window[1], 50)
            ax_bot.plot(t_line, fit.intercept - fit.fitted_rate * t_line, ":", lw=1.4)
    if sigma is not None:
        ax_bot.axvspan(window[0], window[1], color="0.9", zorder=0)
    ax_bot.set_xlabel("t")
    ax_bot.set_ylabel("ln ||H2 phi||")
    ax_bot.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
