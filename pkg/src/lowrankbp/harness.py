"""Seeded Monte Carlo experiment runners shared by the CLI and the tests.

Workers regenerate everything from per-trial seeds (``seed ^ trial_index``),
so results are independent of scheduling; records are ordered by trial index.
``LOWRANKBP_THREADS`` caps the process pool (1 disables it).
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .basis_pursuit import recover, tail_probability_bounds
from .core import GaussianModel, principal_angle_distance
from .exceptions import ConsensusFailureError
from .generators import adversary_from_description, sample_instance
from .pipeline import PipelineConfig, recover_dataset
from .recovery import recover_subspace

_WILSON_Z = 1.959963984540054  # 95% two-sided normal quantile


class ExperimentRecord(NamedTuple):
    """One single-point recovery trial (append-only, one per trial)."""

    trial: int
    seed: int
    l1_error: float
    wall_micros: int


class PipelineTrialRecord(NamedTuple):
    trial: int
    seed: int
    subspace_success: int
    subspace_distance: float
    mean_l1: float
    max_l1: float
    mean_estimate_l1_error: float
    wall_micros: int


class SubspaceTrialRecord(NamedTuple):
    trial: int
    seed: int
    success: int
    distance: float
    wall_micros: int

BP_TAIL_HEADER = [
    "t",
    "trials",
    "exceed_count",
    "empirical_p",
    "wilson_low",
    "wilson_high",
    "bound_factorial",
    "bound_uniform",
    "bound_geometric",
    "bound_min",
]
RECORD_HEADER = ["trial", "seed", "l1_error", "wall_micros"]
PIPELINE_HEADER = [
    "trial",
    "seed",
    "subspace_success",
    "subspace_distance",
    "mean_l1",
    "max_l1",
    "mean_estimate_l1_error",
    "wall_micros",
]
SUBSPACE_HEADER = ["trial", "seed", "success", "distance", "wall_micros"]
BOUNDS_HEADER = [
    "t",
    "bound_factorial",
    "bound_uniform",
    "bound_geometric",
    "bound_min",
]


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z):
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


def thread_count() -> int:
    env = os.environ.get("LOWRANKBP_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _run_indexed(worker, payloads, threads: int | None = None):
    """Run payloads (ordered by trial index) through a worker pool."""
    workers = threads if threads is not None else thread_count()
    if workers <= 1 or len(payloads) < 4:
        results = [worker(p) for p in payloads]
    else:
        chunk = max(1, len(payloads) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, payloads, chunksize=chunk))
    return sorted(results, key=lambda r: r[0])


# ---------------------------------------------------------------------------
# single-point recovery tail


@dataclass(frozen=True)
class BpTailConfig:
    d: int
    k: int
    s: int
    coord_bound: float = 1.0
    subspace_kind: str = "random"  # or "axis"
    adversary: dict = field(default_factory=lambda: {"kind": "random-sign", "bound": 1.0})
    trials: int = 1000
    seed: int = 0
    t_grid: tuple = (0.01, 1.0, 4.0, 8.0)


def _trial_model(kind: str, d: int, k: int, coord_bound: float, rng) -> GaussianModel:
    if kind == "axis":
        factor = np.zeros((k, d))
        factor[:, :k] = np.eye(k) * coord_bound
    elif kind == "random":
        factor = rng.standard_normal((k, d))
        col_std = np.sqrt(np.max(np.sum(factor**2, axis=0)))
        factor *= coord_bound / col_std
    else:
        raise ValueError(f"unknown subspace kind {kind!r}")
    return GaussianModel(np.zeros(d), factor)


def _bp_tail_worker(payload):
    trial, cfg = payload
    trial_seed = cfg.seed ^ trial
    start = time.perf_counter()
    model_rng = np.random.default_rng([trial_seed, 1])
    model = _trial_model(cfg.subspace_kind, cfg.d, cfg.k, cfg.coord_bound, model_rng)
    adversary = adversary_from_description(cfg.adversary)
    instance = sample_instance(model, 1, cfg.s, adversary, trial_seed)
    result = recover(instance.subspace, instance.corrupted[0], instance.clean[0])
    micros = int(1e6 * (time.perf_counter() - start))
    return ExperimentRecord(trial, trial_seed, result.l1_error, micros)


def run_bp_tail(cfg: BpTailConfig, threads: int | None = None):
    """Per-trial l1 errors plus the per-t bound comparison table."""
    payloads = [(trial, cfg) for trial in range(cfg.trials)]
    records = _run_indexed(_bp_tail_worker, payloads, threads)
    errors = np.array([r[2] for r in records])
    rows = []
    for t in cfg.t_grid:
        exceed = int(np.sum(errors >= t))
        low, high = wilson_interval(exceed, cfg.trials)
        if cfg.s > 0:
            bounds = tail_probability_bounds(cfg.k, cfg.s, cfg.d, t)
            geometric = bounds.bound_geometric
            row = [
                t,
                cfg.trials,
                exceed,
                exceed / cfg.trials,
                low,
                high,
                bounds.bound_factorial,
                bounds.bound_uniform,
                geometric if geometric is not None else float("nan"),
                bounds.minimum,
            ]
        else:
            row = [t, cfg.trials, exceed, exceed / cfg.trials, low, high, 0.0, 0.0, 0.0, 0.0]
        rows.append(row)
    return records, rows


# ---------------------------------------------------------------------------
# end-to-end pipeline experiment


@dataclass(frozen=True)
class PipelineExperimentConfig:
    d: int
    k: int
    s: int
    n: int
    coord_bound: float = 1.0
    subspace_kind: str = "random"
    adversary: dict = field(default_factory=lambda: {"kind": "random-sign", "bound": 1.0})
    trials: int = 20
    seed: int = 0
    mean_norm: float = 0.0  # l2 norm of a random mean outside the noise span
    truncation_radius_multiplier: float = 3.0
    known_subspace: bool = False
    known_coord_bound: bool = True


def _pipeline_trial(payload):
    trial, cfg = payload
    trial_seed = cfg.seed ^ trial
    start = time.perf_counter()
    model_rng = np.random.default_rng([trial_seed, 1])
    base = _trial_model(cfg.subspace_kind, cfg.d, cfg.k, cfg.coord_bound, model_rng)
    mean = np.zeros(cfg.d)
    if cfg.mean_norm > 0:
        mean = model_rng.standard_normal(cfg.d)
        mean *= cfg.mean_norm / np.linalg.norm(mean)
    model = GaussianModel(mean, base.factor)
    adversary = adversary_from_description(cfg.adversary)
    instance = sample_instance(
        model, cfg.n, cfg.s, adversary, trial_seed, include_mean_in_subspace=True
    )
    target = instance.subspace

    config = PipelineConfig(
        truncation_radius_multiplier=cfg.truncation_radius_multiplier,
        subspace_override=target if cfg.known_subspace else None,
    )
    bound = model.coord_bound if cfg.known_coord_bound else None
    try:
        report = recover_dataset(
            instance.corrupted,
            config,
            coord_bound=bound,
            clean=instance.clean,
            true_mean=model.mean,
        )
    except ConsensusFailureError:
        micros = int(1e6 * (time.perf_counter() - start))
        return PipelineTrialRecord(
            trial, trial_seed, 0, float("nan"), float("nan"), float("nan"),
            float("nan"), micros,
        )
    distance = principal_angle_distance(report.subspace_used, target)
    success = int(distance < 1e-6)
    per_point = report.per_point_l1
    micros = int(1e6 * (time.perf_counter() - start))
    return PipelineTrialRecord(
        trial,
        trial_seed,
        success,
        distance,
        float(np.mean(per_point)),
        float(np.max(per_point)),
        report.mean_l1_error,
        micros,
    )


def run_pipeline_experiment(cfg: PipelineExperimentConfig, threads: int | None = None):
    payloads = [(trial, cfg) for trial in range(cfg.trials)]
    return _run_indexed(_pipeline_trial, payloads, threads)


# ---------------------------------------------------------------------------
# subspace recovery experiment


@dataclass(frozen=True)
class SubspaceExperimentConfig:
    d: int
    k: int
    s: int
    n: int
    coord_bound: float = 1.0
    subspace_kind: str = "random"
    adversary: dict = field(default_factory=lambda: {"kind": "random-sign", "bound": 1.0})
    trials: int = 20
    seed: int = 0
    mean_norm: float = 0.0


def _subspace_trial(payload):
    trial, cfg = payload
    trial_seed = cfg.seed ^ trial
    start = time.perf_counter()
    model_rng = np.random.default_rng([trial_seed, 1])
    base = _trial_model(cfg.subspace_kind, cfg.d, cfg.k, cfg.coord_bound, model_rng)
    mean = np.zeros(cfg.d)
    if cfg.mean_norm > 0:
        mean = model_rng.standard_normal(cfg.d)
        mean *= cfg.mean_norm / np.linalg.norm(mean)
    model = GaussianModel(mean, base.factor)
    adversary = adversary_from_description(cfg.adversary)
    instance = sample_instance(
        model, cfg.n, cfg.s, adversary, trial_seed, include_mean_in_subspace=True
    )
    try:
        result = recover_subspace(instance.corrupted)
        distance = principal_angle_distance(result.recovered, instance.subspace)
        success = int(distance < 1e-6)
    except ConsensusFailureError:
        distance = float("nan")
        success = 0
    micros = int(1e6 * (time.perf_counter() - start))
    return SubspaceTrialRecord(trial, trial_seed, success, distance, micros)


def run_subspace_experiment(cfg: SubspaceExperimentConfig, threads: int | None = None):
    payloads = [(trial, cfg) for trial in range(cfg.trials)]
    return _run_indexed(_subspace_trial, payloads, threads)


# ---------------------------------------------------------------------------
# output helpers


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def summarize_records(header, rows) -> dict:
    """Column-wise aggregates of numeric record rows."""
    summary = {}
    cols = list(zip(*rows)) if rows else []
    for name, values in zip(header, cols):
        numeric = [v for v in values if isinstance(v, (int, float)) and not _is_nan(v)]
        if not numeric:
            continue
        summary[name] = {
            "mean": float(np.mean(numeric)),
            "min": float(np.min(numeric)),
            "max": float(np.max(numeric)),
        }
    return summary


def _is_nan(v) -> bool:
    return isinstance(v, float) and math.isnan(v)
