"""Command-line front end: score runs, rank them, pick checkpoints, compute
baselines, correlate score with accuracy, and generate synthetic runs.

JSON goes to stdout, diagnostics to stderr. Output is byte-identical across
re-runs on identical inputs (no timestamps). Exit codes: 0 success,
1 computation error, 2 ingestion/validation error. TSCORE_SEED overrides
the default seed of any seeded command whose seed flag was not given.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .baselines import MmdConfig, ProbeConfig, c_entropy, mmd, pearson, proxy_a_distance
from .metrics import HopkinsConfig, MetricReport, transfer_score
from .selection import ScoreSeries, SelectionConfig, select_checkpoint
from .synth import DomainSpec, ToyTrainConfig, generate_domain_pair, train_toy_model
from .tensorio import IngestionError, Run, load_run, read_tensor, write_run


def _env_seed(default: int) -> int:
    value = os.environ.get("TSCORE_SEED")
    return int(value) if value is not None else default


def _seed_or_env(flag_value: int | None, default: int) -> int:
    return flag_value if flag_value is not None else _env_seed(default)


def _add_hopkins_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", type=int, default=None,
                        help="Hopkins sample size (default: clamp(ceil(N/10), 10, 500))")
    parser.add_argument("--reps", type=int, default=5,
                        help="Hopkins repetitions (default 5)")
    parser.add_argument("--seed", type=int, default=None,
                        help="Hopkins sampling seed (default 0)")


def _hopkins_config(args) -> HopkinsConfig:
    return HopkinsConfig(m=args.m, repetitions=args.reps, seed=_seed_or_env(args.seed, 0))


def _add_selection_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau", type=int, default=3, help="saturation window size")
    parser.add_argument("--zeta", type=float, default=0.01, help="saturation threshold")


def _report_json(report: MetricReport) -> dict:
    doc = {
        "epoch": report.epoch,
        "u": report.uniformity,
        "h": report.hopkins,
        "m": report.mutual_info,
        "t": report.transfer_score,
        "accuracy": report.accuracy,
    }
    if report.dim_deficient:
        doc["k_exceeds_dim_plus_one"] = True
    return doc


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc) + "\n")


def _score_run(run: Run, hopkins: HopkinsConfig) -> list[MetricReport]:
    return [transfer_score(record, hopkins) for record in run.records()]


def cmd_score(args) -> int:
    run = load_run(args.run)
    hopkins = _hopkins_config(args)
    if args.epoch is not None:
        reports = [transfer_score(run.load(args.epoch), hopkins)]
    else:
        reports = _score_run(run, hopkins)
    for report in reports:
        _emit(_report_json(report))
    return 0


def _series_of(reports: list[MetricReport]) -> ScoreSeries:
    return ScoreSeries(
        tuple(r.epoch for r in reports),
        tuple(r.transfer_score for r in reports),
    )


def cmd_rank(args) -> int:
    if len(args.runs) < 2:
        raise ValueError(f"need >= 2 runs to rank, got {len(args.runs)}")
    hopkins = _hopkins_config(args)
    selection = SelectionConfig(tau=args.tau, zeta=args.zeta)
    entries = []
    k_seen: dict[str, int] = {}
    for run_dir in args.runs:
        run = load_run(run_dir)
        if args.epoch == "last":
            record = run.load(run.epochs[-1])
            report = transfer_score(record, hopkins)
            k = record.n_classes
        else:
            reports = _score_run(run, hopkins)
            chosen = select_checkpoint(_series_of(reports), selection).selected_epoch
            report = next(r for r in reports if r.epoch == chosen)
            k = run.load(chosen).n_classes
        k_seen[run.manifest.run_id] = k
        entries.append(
            {
                "run_id": run.manifest.run_id,
                "method": run.manifest.method,
                "hyperparameters": run.manifest.hyperparameters,
                "epoch": report.epoch,
                "u": report.uniformity,
                "h": report.hopkins,
                "m": report.mutual_info,
                "t": report.transfer_score,
                "accuracy": report.accuracy,
            }
        )
    if len(set(k_seen.values())) != 1:
        raise ValueError(f"runs disagree on class count: {k_seen}")
    entries.sort(key=lambda e: (-e["t"], e["run_id"]))
    _emit({"entries": entries})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["run_id", "method", "epoch", "u", "h", "m", "t", "accuracy"])
            for e in entries:
                writer.writerow(
                    [e["run_id"], e["method"], e["epoch"], e["u"], e["h"], e["m"],
                     e["t"], "" if e["accuracy"] is None else e["accuracy"]]
                )
    return 0


def cmd_select_epoch(args) -> int:
    run = load_run(args.run)
    reports = _score_run(run, _hopkins_config(args))
    result = select_checkpoint(_series_of(reports), SelectionConfig(tau=args.tau, zeta=args.zeta))
    _emit(
        {
            "selected_epoch": result.selected_epoch,
            "saturated": result.saturated,
            "window_start": result.window_start,
            "saturation_trace": list(result.saturation_trace),
            "tau": args.tau,
            "zeta": args.zeta,
        }
    )
    return 0


def cmd_baseline(args) -> int:
    if args.metric in ("mmd", "pad"):
        if args.source is None or args.target is None:
            raise ValueError(f"--metric {args.metric} needs --source and --target")
        source = read_tensor(args.source)
        target = read_tensor(args.target)
    if args.metric == "mmd":
        bandwidth = "median-heuristic" if args.bandwidth is None else args.bandwidth
        config = MmdConfig(kernel_bandwidth=bandwidth, estimator=args.estimator)
        value = mmd(source, target, config)
        echo = {"kernel_bandwidth": bandwidth, "estimator": args.estimator}
    elif args.metric == "pad":
        config = ProbeConfig(
            train_fraction=args.train_fraction,
            learning_rate=args.lr,
            iterations=args.iterations,
            seed=_seed_or_env(args.seed, 0),
        )
        value = proxy_a_distance(source, target, config)
        echo = {
            "train_fraction": config.train_fraction,
            "learning_rate": config.learning_rate,
            "iterations": config.iterations,
            "seed": config.seed,
        }
    else:
        if args.probabilities is None:
            raise ValueError("--metric centropy needs --probabilities")
        value = c_entropy(read_tensor(args.probabilities))
        echo = {"note": "mean target prediction entropy in nats"}
    _emit({"metric": args.metric, "value": value, "config": echo})
    return 0


def cmd_correlate(args) -> int:
    run = load_run(args.run)
    if len(run) < 2:
        raise ValueError(f"need >= 2 epochs to correlate, got {len(run)}")
    reports = _score_run(run, _hopkins_config(args))
    if any(r.accuracy is None for r in reports):
        raise ValueError("labels required for correlation")
    pairs = [
        {"epoch": r.epoch, "t": r.transfer_score, "accuracy": r.accuracy}
        for r in reports
    ]
    r = pearson([p["t"] for p in pairs], [p["accuracy"] for p in pairs])
    _emit({"pairs": pairs, "pearson_r": r})
    return 0


def _parse_shift(text: str, d_in: int) -> tuple[float, ...]:
    values = [float(v) for v in text.split(",") if v.strip() != ""]
    if len(values) > d_in:
        raise ValueError(f"shift has {len(values)} components, d_in is {d_in}")
    return tuple(values + [0.0] * (d_in - len(values)))


def cmd_synth(args) -> int:
    data_seed = _seed_or_env(args.seed, 0)
    train_seed = _seed_or_env(args.train_seed, 0)
    shift = _parse_shift(args.shift, args.d_in) if args.shift else None
    spec_kwargs = dict(
        k=args.k, d_in=args.d_in, n=args.n, cluster_spread=args.spread,
        rotation_angle=args.rotation, seed=data_seed,
    )
    if shift is not None:
        spec_kwargs["shift"] = shift
    spec = DomainSpec(**spec_kwargs)
    train = ToyTrainConfig(
        d_feat=args.d_feat, epochs=args.epochs, learning_rate=args.lr,
        adapt_weight=args.adapt_weight, seed=train_seed,
    )
    source, target = generate_domain_pair(spec)
    records = train_toy_model(source, target, train)
    out = Path(args.out_dir)
    run_id = args.run_id or out.name
    hyper = {
        "k": str(spec.k), "d_in": str(spec.d_in), "n": str(spec.n),
        "cluster_spread": str(spec.cluster_spread),
        "shift": ",".join(str(v) for v in spec.shift),
        "rotation_angle": str(spec.rotation_angle), "data_seed": str(spec.seed),
        "d_feat": str(train.d_feat), "epochs": str(train.epochs),
        "learning_rate": str(train.learning_rate),
        "adapt_weight": str(train.adapt_weight), "train_seed": str(train.seed),
    }
    manifest_path = write_run(records, out, run_id=run_id, method=args.method,
                              hyperparameters=hyper)
    _emit({"manifest": str(manifest_path), "run_id": run_id, "epochs": len(records)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tscore",
        description="Label-free evaluation and checkpoint selection for domain-adaptation runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="per-epoch metrics for one run, one JSON object per epoch")
    p.add_argument("run", help="run directory or manifest path")
    p.add_argument("--epoch", type=int, default=None, help="score only this epoch index")
    _add_hopkins_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="rank runs by transfer score")
    p.add_argument("runs", nargs="+", help="run directories or manifest paths")
    p.add_argument("--epoch", choices=["last", "selected"], default="last",
                   help="score each run at its last epoch or its selected checkpoint")
    p.add_argument("--csv", default=None, help="also write a CSV table to this path")
    _add_hopkins_flags(p)
    _add_selection_flags(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("select-epoch", help="pick a checkpoint via the saturation rule")
    p.add_argument("run", help="run directory or manifest path")
    _add_hopkins_flags(p)
    _add_selection_flags(p)
    p.set_defaults(func=cmd_select_epoch)

    p = sub.add_parser("baseline", help="MMD, proxy A-distance, or mean prediction entropy")
    p.add_argument("--metric", choices=["mmd", "pad", "centropy"], required=True)
    p.add_argument("--source", default=None, help=".tsr feature matrix, source domain")
    p.add_argument("--target", default=None, help=".tsr feature matrix, target domain")
    p.add_argument("--probabilities", default=None, help=".tsr probability matrix")
    p.add_argument("--estimator", choices=["biased", "unbiased"], default="biased")
    p.add_argument("--bandwidth", type=float, default=None,
                   help="Gaussian kernel bandwidth (default: median heuristic)")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("correlate", help="per-epoch (T, accuracy) pairs and Pearson r")
    p.add_argument("run", help="run directory or manifest path (labels required)")
    _add_hopkins_flags(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("synth", help="generate and export a synthetic training run")
    p.add_argument("out_dir", help="output directory for the manifest and .tsr files")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--d-in", type=int, default=5)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--shift", default=None,
                   help="comma-separated translation, zero-padded to d_in "
                        "(default: the benchmark shift)")
    p.add_argument("--rotation", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=None, help="data seed")
    p.add_argument("--d-feat", type=int, default=4)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--adapt-weight", type=float, default=0.1,
                   help="target entropy-minimization weight")
    p.add_argument("--train-seed", type=int, default=None)
    p.add_argument("--run-id", default=None, help="defaults to the output directory name")
    p.add_argument("--method", default="linear-entmin")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IngestionError as exc:
        print(f"tscore: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tscore: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"tscore: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
