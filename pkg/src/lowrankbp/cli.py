"""Command-line experiment harness.

Subcommands: ``bp-tail``, ``pipeline``, ``subspace``, ``combinat``,
``bounds``.  A flat ``key = value`` config file may provide any flag's value;
explicit flags win.  Exit codes: 0 success, 2 config error, 3 regime failure
(consensus lost), 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from . import combinatorics, harness
from .basis_pursuit import expected_error_bound, tail_probability_bounds
from .exceptions import (
    ConsensusFailureError,
    DegenerateSampleError,
    DimensionMismatchError,
    LowRankBPError,
    NoValidQError,
    TooLargeError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_INTERNAL = 4


def _parse_config_file(path: str) -> dict:
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _t_grid(text: str):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _adversary_description(name: str, bound: float, magnitude: float) -> dict:
    name = name.replace("_", "-")
    if name == "zero-out":
        return {"kind": "zero-out"}
    if name == "random-sign":
        return {"kind": "random-sign", "bound": bound}
    if name == "worst-case-1d":
        return {"kind": "worst-case-1d", "bound": bound}
    if name == "large-spike":
        return {"kind": "large-spike", "magnitude": magnitude}
    raise ValueError(f"unknown adversary {name!r}")


def _add_common(parser):
    parser.add_argument("--config", help="flat key=value config file; flags win")
    parser.add_argument("--d", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--s", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--B", dest="coord_bound", type=float)
    parser.add_argument(
        "--adversary",
        choices=["zero-out", "random-sign", "worst-case-1d", "large-spike"],
    )
    parser.add_argument("--magnitude", type=float, help="spike size for large-spike")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--t-grid", dest="t_grid")
    parser.add_argument("--subspace-kind", choices=["random", "axis"])
    parser.add_argument("--mean-norm", dest="mean_norm", type=float)
    parser.add_argument("--out", help="primary CSV output path")
    parser.add_argument("--summary", help="JSON summary output path")
    parser.add_argument("--records", help="per-trial CSV output path")
    parser.add_argument("--threads", type=int, help="worker pool size override")


_DEFAULTS = {
    "d": 100,
    "k": 2,
    "s": 3,
    "n": 200,
    "coord_bound": 1.0,
    "adversary": "random-sign",
    "magnitude": 1e9,
    "trials": 100,
    "seed": 0,
    "t_grid": "0.01,1,4,8",
    "subspace_kind": "random",
    "mean_norm": 0.0,
}

_CASTS = {
    "d": int,
    "k": int,
    "s": int,
    "n": int,
    "coord_bound": float,
    "magnitude": float,
    "trials": int,
    "seed": int,
    "mean_norm": float,
    "threads": int,
}


def _validate_dimensions(cfg: dict) -> None:
    d, k, s = cfg["d"], cfg["k"], cfg["s"]
    if d < 1 or k < 1 or k > d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    if not 0 <= s <= d:
        raise ValueError(f"need 0 <= s <= d, got s={s}, d={d}")
    if cfg["n"] < 1:
        raise ValueError(f"need n >= 1, got {cfg['n']}")
    if cfg["trials"] < 1:
        raise ValueError(f"need trials >= 1, got {cfg['trials']}")
    if cfg["coord_bound"] <= 0:
        raise ValueError(f"need B > 0, got {cfg['coord_bound']}")


def _merged(args) -> dict:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        for key, value in _parse_config_file(args.config).items():
            merged[key] = _CASTS.get(key, str)(value)
    for key, value in vars(args).items():
        if value is not None and key in set(_DEFAULTS) | {"threads", "out", "summary", "records"}:
            merged[key] = value
    return merged


def _cmd_bp_tail(args) -> int:
    cfg_map = _merged(args)
    _validate_dimensions(cfg_map)
    cfg = harness.BpTailConfig(
        d=cfg_map["d"],
        k=cfg_map["k"],
        s=cfg_map["s"],
        coord_bound=cfg_map["coord_bound"],
        subspace_kind=cfg_map["subspace_kind"],
        adversary=_adversary_description(
            cfg_map["adversary"], cfg_map["coord_bound"], cfg_map["magnitude"]
        ),
        trials=cfg_map["trials"],
        seed=cfg_map["seed"],
        t_grid=_t_grid(cfg_map["t_grid"]),
    )
    records, rows = harness.run_bp_tail(cfg, cfg_map.get("threads"))
    out = cfg_map.get("out") or "bp_tail.csv"
    harness.write_csv(out, harness.BP_TAIL_HEADER, rows)
    if cfg_map.get("records"):
        harness.write_csv(cfg_map["records"], harness.RECORD_HEADER, records)
    if cfg_map.get("summary"):
        harness.write_json(
            cfg_map["summary"],
            {
                "config": asdict(cfg),
                "table": [dict(zip(harness.BP_TAIL_HEADER, row)) for row in rows],
                "records": harness.summarize_records(harness.RECORD_HEADER, records),
            },
        )
    print(f"wrote {out} ({cfg.trials} trials)")
    return EXIT_OK


def _run_pipeline_on_instance(args) -> int:
    from .generators import load_instance
    from .pipeline import PipelineConfig, recover_dataset, save_report

    instance = load_instance(args.instance)
    config = PipelineConfig(
        subspace_override=instance.subspace if args.known_subspace else None
    )
    report = recover_dataset(
        instance.corrupted,
        config,
        coord_bound=instance.model.coord_bound,
        clean=instance.clean,
        true_mean=instance.model.mean,
    )
    out = args.report or "report.json"
    save_report(report, out)
    mean_l1 = float(report.per_point_l1.mean())
    print(f"wrote {out} (mean per-point l1 {mean_l1:.6g})")
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    if getattr(args, "instance", None):
        return _run_pipeline_on_instance(args)
    cfg_map = _merged(args)
    _validate_dimensions(cfg_map)
    cfg = harness.PipelineExperimentConfig(
        d=cfg_map["d"],
        k=cfg_map["k"],
        s=cfg_map["s"],
        n=cfg_map["n"],
        coord_bound=cfg_map["coord_bound"],
        subspace_kind=cfg_map["subspace_kind"],
        adversary=_adversary_description(
            cfg_map["adversary"], cfg_map["coord_bound"], cfg_map["magnitude"]
        ),
        trials=cfg_map["trials"],
        seed=cfg_map["seed"],
        mean_norm=cfg_map["mean_norm"],
    )
    records = harness.run_pipeline_experiment(cfg, cfg_map.get("threads"))
    successes = sum(r[2] for r in records)
    if successes == 0:
        print("no trial recovered the subspace; corruption too heavy", file=sys.stderr)
        return EXIT_REGIME
    out = cfg_map.get("out") or "pipeline.csv"
    harness.write_csv(out, harness.PIPELINE_HEADER, records)
    if cfg_map.get("summary"):
        harness.write_json(
            cfg_map["summary"],
            {
                "config": asdict(cfg),
                "subspace_success_rate": successes / cfg.trials,
                "records": harness.summarize_records(harness.PIPELINE_HEADER, records),
            },
        )
    print(f"wrote {out} (success {successes}/{cfg.trials})")
    return EXIT_OK


def _cmd_subspace(args) -> int:
    cfg_map = _merged(args)
    _validate_dimensions(cfg_map)
    cfg = harness.SubspaceExperimentConfig(
        d=cfg_map["d"],
        k=cfg_map["k"],
        s=cfg_map["s"],
        n=cfg_map["n"],
        coord_bound=cfg_map["coord_bound"],
        subspace_kind=cfg_map["subspace_kind"],
        adversary=_adversary_description(
            cfg_map["adversary"], cfg_map["coord_bound"], cfg_map["magnitude"]
        ),
        trials=cfg_map["trials"],
        seed=cfg_map["seed"],
        mean_norm=cfg_map["mean_norm"],
    )
    records = harness.run_subspace_experiment(cfg, cfg_map.get("threads"))
    successes = sum(r[2] for r in records)
    out = cfg_map.get("out") or "subspace.csv"
    harness.write_csv(out, harness.SUBSPACE_HEADER, records)
    if cfg_map.get("summary"):
        harness.write_json(
            cfg_map["summary"],
            {
                "config": asdict(cfg),
                "success_rate": successes / cfg.trials,
                "records": harness.summarize_records(harness.SUBSPACE_HEADER, records),
            },
        )
    print(f"wrote {out} (success {successes}/{cfg.trials})")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    cfg_map = _merged(args)
    _validate_dimensions(cfg_map)
    rows = []
    for t in _t_grid(cfg_map["t_grid"]):
        b = tail_probability_bounds(cfg_map["k"], cfg_map["s"], cfg_map["d"], t)
        rows.append(
            [
                t,
                b.bound_factorial,
                b.bound_uniform,
                b.bound_geometric if b.bound_geometric is not None else float("nan"),
                b.minimum,
            ]
        )
    out = cfg_map.get("out") or "bounds.csv"
    harness.write_csv(out, harness.BOUNDS_HEADER, rows)
    expected = expected_error_bound(
        cfg_map["k"], cfg_map["s"], cfg_map["d"], cfg_map["coord_bound"]
    )
    if cfg_map.get("summary"):
        harness.write_json(
            cfg_map["summary"],
            {
                "d": cfg_map["d"],
                "k": cfg_map["k"],
                "s": cfg_map["s"],
                "coord_bound": cfg_map["coord_bound"],
                "expected_error_bound": expected,
            },
        )
    print(f"wrote {out} (expected error bound {expected:.6g})")
    return EXIT_OK


def _cmd_combinat(args) -> int:
    if args.subcommand == "verify-packing":
        family = combinatorics.build_packing(args.d, args.s, args.delta)
        ok = combinatorics.verify_packing(family, args.delta)
        if args.out:
            family.save(args.out)
        print(f"{'OK' if ok else 'FAIL'} size={len(family)}")
        return EXIT_OK if ok else EXIT_INTERNAL
    if args.subcommand == "conjecture":
        exact, witness = combinatorics.max_family_no_matchable(
            args.d, args.s, args.k, args.t
        )
        best_fi, closed = combinatorics.conjectured_family_bounds(
            args.d, args.s, args.k, args.t
        )
        if args.out:
            witness.save(args.out)
        print(
            f"exact={exact} max_Fi={best_fi} closed_form={closed:.6g} "
            f"match={str(exact == best_fi).lower()}"
        )
        return EXIT_OK
    if args.subcommand == "matching":
        sets = combinatorics.load_set_list(args.family)
        flag, blocks = combinatorics.has_perfect_matching(sets, args.target_size)
        print(str(flag).lower())
        if flag and args.out:
            lines = [" ".join(str(e) for e in b.elements) for b in blocks]
            Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        return EXIT_OK
    raise ValueError(f"unknown combinat subcommand {args.subcommand!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowrank-bp",
        description="Monte Carlo harness for l1 recovery of low-rank data "
        "under random coordinate corruptions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in [
        ("bp-tail", _cmd_bp_tail),
        ("pipeline", _cmd_pipeline),
        ("subspace", _cmd_subspace),
        ("bounds", _cmd_bounds),
    ]:
        p = sub.add_parser(name)
        _add_common(p)
        if name == "pipeline":
            p.add_argument("--instance", help="stored instance JSON to recover")
            p.add_argument("--report", help="recovery report JSON output path")
            p.add_argument(
                "--known-subspace", action="store_true",
                help="use the instance's stored span instead of recovering it",
            )
        p.set_defaults(handler=fn)

    comb = sub.add_parser("combinat")
    comb_sub = comb.add_subparsers(dest="subcommand", required=True)
    vp = comb_sub.add_parser("verify-packing")
    vp.add_argument("--d", type=int, required=True)
    vp.add_argument("--s", type=int, required=True)
    vp.add_argument("--delta", type=int, required=True)
    vp.add_argument("--out")
    conj = comb_sub.add_parser("conjecture")
    conj.add_argument("--d", type=int, required=True)
    conj.add_argument("--s", type=int, required=True)
    conj.add_argument("--k", type=int, required=True)
    conj.add_argument("--t", type=int, required=True)
    conj.add_argument("--out")
    match = comb_sub.add_parser("matching")
    match.add_argument("--family", required=True, help="SetFamily text file")
    match.add_argument("--target-size", dest="target_size", type=int, required=True)
    match.add_argument("--out")
    comb.set_defaults(handler=_cmd_combinat)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.handler(args)
    except (ConsensusFailureError, DegenerateSampleError) as exc:
        print(f"regime failure: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ValueError, OSError, DimensionMismatchError, TooLargeError, NoValidQError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LowRankBPError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
