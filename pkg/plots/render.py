#!/usr/bin/env python3
"""Render experiment-harness CSVs into figures.

Reads only the documented CSV schemas (see ../docs/formats.md and README.md
in this directory); no quantity is recomputed.  Output is deterministic for
fixed inputs: fixed style, no timestamps in image metadata.

Kinds:
  tail     bp-tail table -> empirical tail with Wilson error bars plus the
           three analytic bound curves (log-y over t)
  sweep    rows of (ks_over_d, mean_l1) -> error-vs-ks/d line plot
  heatmap  rows of (k, s, success_rate) -> subspace success heatmap
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "lowrankbp-plots"  # deterministic ids
import matplotlib.pyplot as plt  # noqa: E402

TAIL_COLUMNS = [
    "t",
    "empirical_p",
    "wilson_low",
    "wilson_high",
    "bound_factorial",
    "bound_uniform",
    "bound_geometric",
]
SWEEP_COLUMNS = ["ks_over_d", "mean_l1"]
HEATMAP_COLUMNS = ["k", "s", "success_rate"]


class RenderError(Exception):
    pass


def read_table(path: str, required: list[str]) -> list[dict[str, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RenderError(f"{path}: empty input, no header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise RenderError(f"{path}: missing columns {missing}")
        rows = []
        for raw in reader:
            rows.append({c: float(raw[c]) for c in required})
    if not rows:
        raise RenderError(f"{path}: no data rows")
    return rows


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    ax.grid(True, which="both", alpha=0.25, linewidth=0.5)
    return fig, ax


def render_tail(rows, out_path: str):
    """Empirical exceedance probabilities with their three analytic bounds:
    exactly four curves."""
    rows = sorted(rows, key=lambda r: r["t"])
    ts = [r["t"] for r in rows]
    fig, ax = _new_axes()
    floor = 1e-6  # keeps zero-probability points visible on the log axis

    def lift(values):
        return [max(v, floor) for v in values]

    empirical = lift(r["empirical_p"] for r in rows)
    err_low = [
        max(p - max(r["wilson_low"], floor), 0.0)
        for p, r in zip(empirical, rows)
    ]
    err_high = [
        max(max(r["wilson_high"], floor) - p, 0.0)
        for p, r in zip(empirical, rows)
    ]
    ax.errorbar(
        ts, empirical, yerr=[err_low, err_high],
        marker="o", capsize=3, linewidth=1.2, color="black",
        label="empirical",
    )
    styles = [
        ("bound_factorial", "tab:blue", "--"),
        ("bound_uniform", "tab:orange", "-."),
        ("bound_geometric", "tab:green", ":"),
    ]
    for column, color, dash in styles:
        values = [
            r[column] if not math.isnan(r[column]) else float("nan") for r in rows
        ]
        ax.plot(ts, lift(values), dash, color=color, linewidth=1.4,
                label=column.replace("bound_", "bound: "))
    ax.set_xlabel("error threshold t")
    ax.set_ylabel("P(l1 error >= t)")
    ax.set_yscale("log")
    ax.legend(frameon=False, fontsize=9)
    _save(fig, out_path)
    return fig


def render_sweep(rows, out_path: str):
    rows = sorted(rows, key=lambda r: r["ks_over_d"])
    fig, ax = _new_axes()
    ax.plot(
        [r["ks_over_d"] for r in rows],
        [r["mean_l1"] for r in rows],
        marker="s", color="tab:red", linewidth=1.4,
    )
    ax.set_xlabel("k s / d")
    ax.set_ylabel("mean per-point l1 error")
    _save(fig, out_path)
    return fig


def render_heatmap(rows, out_path: str):
    ks = sorted({int(r["k"]) for r in rows})
    ss = sorted({int(r["s"]) for r in rows})
    grid = [[float("nan")] * len(ss) for _ in ks]
    for r in rows:
        grid[ks.index(int(r["k"]))][ss.index(int(r["s"]))] = r["success_rate"]
    fig, ax = _new_axes()
    ax.grid(False)
    image = ax.imshow(
        grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0, cmap="viridis"
    )
    ax.set_xticks(range(len(ss)), [str(s) for s in ss])
    ax.set_yticks(range(len(ks)), [str(k) for k in ks])
    ax.set_xlabel("corruptions per point s")
    ax.set_ylabel("span dimension k")
    fig.colorbar(image, ax=ax, label="subspace success rate")
    _save(fig, out_path)
    return fig


def _save(fig, out_path: str):
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    if suffix == ".svg":
        metadata = {"Date": None}  # matplotlib would embed a timestamp
    elif suffix == ".png":
        metadata = {"Software": "plots/render.py"}
    else:
        metadata = None
    fig.savefig(path, bbox_inches="tight", metadata=metadata)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render.py", description="render experiment CSVs into figures"
    )
    parser.add_argument("--kind", choices=["tail", "sweep", "heatmap"], required=True)
    parser.add_argument("--in", dest="input", required=True, help="input CSV path")
    parser.add_argument("--out", required=True, help="output image path (.png/.svg)")
    args = parser.parse_args(argv)
    try:
        if args.kind == "tail":
            render_tail(read_table(args.input, TAIL_COLUMNS), args.out)
        elif args.kind == "sweep":
            render_sweep(read_table(args.input, SWEEP_COLUMNS), args.out)
        else:
            render_heatmap(read_table(args.input, HEATMAP_COLUMNS), args.out)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
