"""Render benchmark result CSVs into static figures.

Consumes only the documented delimited schemas emitted by the harness:

* run CSV (``parsu run``): one row per (mode, threads, seed, epoch) with
  columns run_id, mode, algorithm, dataset, threads, seed, epoch,
  objective, partition_time_s, update_time_s, cumulative_time_s
* speedup CSV (``parsu speedup``): mode, threads, epsilon, time_to_eps_s,
  updates_time_to_eps_s, speedup, updates_speedup, runs

Output is a static image (PNG/SVG by extension); rendering is
deterministic for a fixed input.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

RUN_COLUMNS = ("run_id", "mode", "algorithm", "dataset", "threads", "seed",
               "epoch", "objective", "partition_time_s", "update_time_s",
               "cumulative_time_s")
SPEEDUP_COLUMNS = ("mode", "threads", "epsilon", "time_to_eps_s",
                   "updates_time_to_eps_s", "speedup", "updates_speedup",
                   "runs")

plt.rcParams.update({
    "figure.figsize": (6.4, 4.2),
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "parsu-plots",
})


class SchemaError(ValueError):
    """Input CSV does not carry the documented columns (or has no rows)."""


@dataclass(frozen=True)
class FigureInfo:
    path: str
    series: tuple[str, ...]


def _read_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(required) - set(reader.fieldnames or ())
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def plot_convergence(csv_path: str, out_path: str,
                     log_y: bool = False) -> FigureInfo:
    """Objective versus cumulative running time, one series per
    (mode, threads); runs differing only in seed are averaged per epoch."""
    rows = _read_rows(csv_path, RUN_COLUMNS)
    groups: dict[tuple[str, int], dict[int, list[tuple[float, float]]]] = {}
    for r in rows:
        key = (r["mode"], int(r["threads"]))
        groups.setdefault(key, {}).setdefault(int(r["epoch"]), []).append(
            (float(r["cumulative_time_s"]), float(r["objective"])))

    fig, ax = plt.subplots()
    labels = []
    for (mode, threads) in sorted(groups):
        epochs = sorted(groups[(mode, threads)])
        xs = [sum(p[0] for p in groups[(mode, threads)][e])
              / len(groups[(mode, threads)][e]) for e in epochs]
        ys = [sum(p[1] for p in groups[(mode, threads)][e])
              / len(groups[(mode, threads)][e]) for e in epochs]
        label = f"{mode}, {threads} thread{'s' if threads != 1 else ''}"
        ax.plot(xs, ys, marker="o", markersize=3, label=label)
        labels.append(label)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("cumulative time (s)")
    ax.set_ylabel("objective")
    ax.set_title("Convergence vs overall running time")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return FigureInfo(path=out_path, series=tuple(labels))


def plot_speedup(csv_path: str, out_path: str,
                 column: str = "speedup") -> FigureInfo:
    """Speedup versus thread count per mode, with the ideal-linear
    reference; ``column`` selects overall or updates-only speedup."""
    if column not in ("speedup", "updates_speedup"):
        raise ValueError("column must be 'speedup' or 'updates_speedup'")
    rows = _read_rows(csv_path, SPEEDUP_COLUMNS)
    groups: dict[str, list[tuple[int, float]]] = {}
    for r in rows:
        groups.setdefault(r["mode"], []).append(
            (int(r["threads"]), float(r[column])))

    fig, ax = plt.subplots()
    max_threads = max(t for pts in groups.values() for t, _ in pts)
    ax.plot([1, max_threads], [1, max_threads], linestyle="--",
            color="0.6", label="ideal")
    labels = []
    for mode in sorted(groups):
        pts = sorted(groups[mode])
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="s", markersize=4, label=mode)
        labels.append(mode)
    ax.set_xlabel("threads")
    ax.set_ylabel("updates-only speedup" if column == "updates_speedup"
                  else "overall speedup")
    ax.set_title("Speedup vs number of threads")
    ax.set_xticks(sorted({t for pts in groups.values() for t, _ in pts} | {1}))
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return FigureInfo(path=out_path, series=tuple(labels))
