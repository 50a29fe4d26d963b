"""Figure rendering for finished experiment runs.

Turns a results CSV into two plots next to it: mean match score per sweep
point for both algorithms, and the score gap between them. Both carry
standard-error bars over the trials of each point.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ConfigError  # noqa: E402
from .harness import RESULTS_CSV_HEADER  # noqa: E402

SCORES_FIGURE = "scores.png"
GAP_FIGURE = "score_gap.png"

_FLOAT_COLUMNS = ("gs_mean_score", "random_mean_score", "score_gap",
                  "gs_runtime_ms", "random_runtime_ms")


def load_results_csv(path: str) -> list[dict]:
    """Parse a results CSV into typed row dicts, checking the header."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"results file {path} is empty") from None
        if header != RESULTS_CSV_HEADER.split(","):
            raise ConfigError(
                f"results file {path} has unexpected header: {','.join(header)}"
            )
        rows = []
        for raw in reader:
            row = dict(zip(header, raw))
            for key in ("sweep_point", "n_haps", "m_uavs", "trial", "gs_matched"):
                row[key] = int(row[key])
            for key in _FLOAT_COLUMNS:
                row[key] = float(row[key])
            rows.append(row)
    if not rows:
        raise ConfigError(f"results file {path} has no data rows")
    return rows


def _per_point(rows: list[dict], column: str):
    points = sorted({r["sweep_point"] for r in rows})
    n_haps, means, errs = [], [], []
    for p in points:
        vals = np.array([r[column] for r in rows if r["sweep_point"] == p])
        n_haps.append(next(r["n_haps"] for r in rows if r["sweep_point"] == p))
        means.append(vals.mean())
        errs.append(vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0)
    return np.array(n_haps), np.array(means), np.array(errs)


def render_report(csv_path: str, out_dir: str) -> list[Path]:
    """Render the score and score-gap figures for one results CSV.

    Returns the paths of the written image files.
    """
    rows = load_results_csv(csv_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    x, gs_mean, gs_err = _per_point(rows, "gs_mean_score")
    _, rnd_mean, rnd_err = _per_point(rows, "random_mean_score")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(x, gs_mean, yerr=gs_err, marker="o", capsize=3,
                label="deferred acceptance")
    ax.errorbar(x, rnd_mean, yerr=rnd_err, marker="s", capsize=3,
                label="random assignment")
    ax.set_xlabel("HAP count (UAVs scale with it)")
    ax.set_ylabel("mean match score (dB, lower is better)")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out / SCORES_FIGURE
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    _, gap_mean, gap_err = _per_point(rows, "score_gap")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(x, gap_mean, yerr=gap_err, marker="o", capsize=3, color="tab:green")
    ax.axhline(0.0, color="gray", linewidth=0.8)
    ax.set_xlabel("HAP count (UAVs scale with it)")
    ax.set_ylabel("score gap: random - deferred acceptance (dB)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = out / GAP_FIGURE
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written
