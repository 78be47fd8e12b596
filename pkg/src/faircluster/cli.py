"""Command-line interface: CSV ingestion, sweeps over k, and reports.

`faircluster sweep` runs classical and balance-guaranteed clusterings for a
range of k and both objectives, emitting JSON (and optionally CSV) reports;
`faircluster decompose` exposes the fairlet stage alone. Exit codes: 0 on
success, 2 when the requested balance is infeasible for the data, 1 on I/O
or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import fairlets as fl
from .clustering import (WeightedPointSet, cluster_fairlets, cost_composition,
                         decompose_for_objective, gonzalez_kcenter,
                         local_search_kmedian, objective_cost)
from .core import (Clustering, ColoredDataset, Objective,
                   balance_of_clustering, balance_of_dataset)

_CSV_FIELDS = ("objective", "k", "classical_cost", "classical_balance",
               "fair_cost", "fair_balance", "fairlet_cost")


@dataclass(frozen=True)
class ExperimentConfig:
    input_path: str
    color_column: str
    positive_color_value: str          # rows with this value become BLUE
    feature_columns: tuple[str, ...]
    k_range: tuple[int, int]           # inclusive
    t_prime: int = 2
    objective: str = "both"            # center | median | both
    seed: int = 0
    subsample: int | None = None
    normalize: bool = True

    def __post_init__(self):
        if self.k_range[0] > self.k_range[1] or self.k_range[0] < 1:
            raise ValueError("k range must be nonempty and start at 1 or above")
        if self.t_prime < 1:
            raise ValueError("t_prime must be at least 1")
        if not self.feature_columns:
            raise ValueError("at least one feature column is required")
        if self.objective not in ("center", "median", "both"):
            raise ValueError("objective must be center, median, or both")

    def objectives(self) -> list[Objective]:
        if self.objective == "both":
            return [Objective.CENTER, Objective.MEDIAN]
        return [Objective[self.objective.upper()]]


def load_csv(cfg: ExperimentConfig) -> ColoredDataset:
    """Parse the delimited input into a colored dataset.

    Feature cells that fail to parse as numbers cause the row to be skipped
    (a count is printed to stderr). Colors: BLUE iff the color column equals
    the configured positive value. Optional seeded subsample without
    replacement, then optional per-column min-max normalization to [0, 1].
    """
    try:
        fh = open(cfg.input_path, newline="", encoding="utf-8")
    except OSError as e:
        raise ValueError(f"cannot open input: {e}") from e
    rows, colors = [], []
    skipped = 0
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (cfg.color_column, *cfg.feature_columns)
                   if c not in header]
        if missing:
            raise ValueError(f"missing columns: {', '.join(missing)}")
        for rec in reader:
            try:
                feats = [float(rec[c]) for c in cfg.feature_columns]
            except (TypeError, ValueError):
                skipped += 1
                continue
            rows.append(feats)
            colors.append(1 if rec[cfg.color_column] == cfg.positive_color_value
                          else 0)
    if skipped:
        print(f"skipped {skipped} rows with unparsable numerics", file=sys.stderr)
    if not rows:
        raise ValueError("no usable rows in input")
    coords = np.asarray(rows, dtype=np.float64)
    cols = np.asarray(colors, dtype=np.uint8)
    if cfg.subsample is not None and cfg.subsample < len(rows):
        rng = np.random.default_rng(cfg.seed)
        keep = np.sort(rng.choice(len(rows), size=cfg.subsample, replace=False))
        coords, cols = coords[keep], cols[keep]
    if cfg.normalize:
        lo = coords.min(axis=0)
        span = coords.max(axis=0) - lo
        span[span == 0] = 1.0
        coords = (coords - lo) / span
    if cols.min() == cols.max():
        raise ValueError("all points have one color; no balance is achievable")
    return ColoredDataset.from_points(coords, cols)


@dataclass
class ExperimentReport:
    metadata: dict
    records: list[dict] = field(default_factory=list)

    def check_invariants(self) -> None:
        threshold = Fraction(1, self.metadata["t_prime"])
        for rec in self.records:
            if rec.get("skipped"):
                continue
            if Fraction(rec["fair_balance_exact"]) < threshold:
                raise AssertionError(
                    f"record {rec['objective']}/k={rec['k']}: fair balance "
                    f"{rec['fair_balance_exact']} below 1/{self.metadata['t_prime']}")
            if rec["objective"] == "center" and \
                    rec["fair_cost"] < rec["fairlet_cost"] - 1e-9:
                raise AssertionError(
                    f"record center/k={rec['k']}: fair cost {rec['fair_cost']} "
                    f"fell below the fairlet cost {rec['fairlet_cost']}")


def _seed_for(base_seed: int, objective: Objective, k: int) -> int:
    ss = np.random.SeedSequence(entropy=base_seed,
                                spawn_key=(list(Objective).index(objective), k))
    return int(ss.generate_state(1)[0])


def run_sweep(cfg: ExperimentConfig, ds: ColoredDataset | None = None) -> ExperimentReport:
    """Classical vs fair clustering for every k in range and each objective.

    The fairlet decomposition is computed once per objective and reused
    across k. Per-(objective, k) runs execute in a thread pool capped by
    FAIRCLUSTER_THREADS. Records are deterministic for a fixed config.
    """
    if ds is None:
        ds = load_csv(cfg)
    bal = balance_of_dataset(ds)
    if bal < Fraction(1, cfg.t_prime):
        raise fl.InfeasibleBalanceError(
            f"dataset balance {bal} is below 1/{cfg.t_prime}")

    wall_times: dict[str, float] = {}
    decs = {}
    for obj in cfg.objectives():
        t0 = time.perf_counter()
        decs[obj] = decompose_for_objective(ds, cfg.t_prime, obj)
        wall_times[f"decompose_{obj.value.lower()}"] = time.perf_counter() - t0

    all_ids = np.arange(ds.n, dtype=np.int64)
    ks = range(cfg.k_range[0], cfg.k_range[1] + 1)
    tasks = [(obj, k) for obj in cfg.objectives() for k in ks]

    def one_run(obj: Objective, k: int) -> dict:
        dec = decs[obj]
        fairlet_cost = fl.decomposition_cost(ds, dec, obj)
        rec = {"objective": obj.value.lower(), "k": k,
               "fairlet_cost": fairlet_cost}
        if k > ds.n:
            rec.update(skipped="k exceeds point count")
            return rec
        if obj is Objective.CENTER:
            classical = gonzalez_kcenter(ds, all_ids, k)
        else:
            classical = local_search_kmedian(
                ds, WeightedPointSet.uniform(all_ids), k,
                _seed_for(cfg.seed, obj, k))
        rec["classical_cost"] = objective_cost(ds, classical, obj)
        rec["classical_balance"] = float(balance_of_clustering(ds, classical))
        if k > dec.size:
            rec.update(skipped="k exceeds fairlet count")
            return rec
        fair = cluster_fairlets(ds, dec, k, obj, _seed_for(cfg.seed, obj, k))
        fair_balance = balance_of_clustering(ds, fair)
        lhs, dec_term, centers_term = cost_composition(ds, fair, dec, obj)
        if lhs > dec_term + centers_term + 1e-6 * max(1.0, lhs):
            raise AssertionError("cost composition inequality violated")
        rec["fair_cost"] = lhs
        rec["fair_balance"] = float(fair_balance)
        rec["fair_balance_exact"] = f"{fair_balance.numerator}/{fair_balance.denominator}"
        return rec

    workers = os.environ.get("FAIRCLUSTER_THREADS", "")
    max_workers = int(workers) if workers.strip() else (os.cpu_count() or 1)
    t0 = time.perf_counter()
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            records = list(pool.map(lambda a: one_run(*a), tasks))
    else:
        records = [one_run(*task) for task in tasks]
    wall_times["sweep"] = time.perf_counter() - t0

    report = ExperimentReport(
        metadata={
            "n": ds.n,
            "n_red": int(len(ds.red_ids)),
            "n_blue": int(len(ds.blue_ids)),
            "dataset_balance": float(bal),
            "dataset_balance_exact": f"{bal.numerator}/{bal.denominator}",
            "t_prime": cfg.t_prime,
            "seed": cfg.seed,
            "normalize": cfg.normalize,
            "wall_times": wall_times,
        },
        records=records,
    )
    report.check_invariants()
    return report


def emit(report: ExperimentReport, fmt: str, path: str) -> None:
    """Write a report as JSON (one document) or CSV (records only)."""
    if fmt == "JSON":
        doc = {"metadata": report.metadata, "records": report.records}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif fmt == "CSV":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_FIELDS)
            for rec in report.records:
                if rec.get("skipped"):
                    continue
                writer.writerow([
                    rec["objective"], rec["k"],
                    repr(rec["classical_cost"]),
                    f"{rec['classical_balance']:.6f}",
                    repr(rec["fair_cost"]),
                    f"{rec['fair_balance']:.6f}",
                    repr(rec["fairlet_cost"]),
                ])
    else:
        raise ValueError(f"unknown format: {fmt}")


# ---------------------------------------------------------------------------
# Argument parsing and entry points.


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on config errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _parse_k_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    k = int(text)
    return k, k


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--color-column", required=True)
    p.add_argument("--positive", required=True,
                   help="color-column value treated as BLUE")
    p.add_argument("--features", required=True,
                   help="comma-separated numeric feature columns")
    p.add_argument("--tprime", type=int, default=2)
    p.add_argument("--objective", choices=["center", "median", "both"],
                   default="both")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--out", required=True, help="JSON output path")


def _config_from_args(args, k_range) -> ExperimentConfig:
    return ExperimentConfig(
        input_path=args.input,
        color_column=args.color_column,
        positive_color_value=args.positive,
        feature_columns=tuple(c.strip() for c in args.features.split(",") if c.strip()),
        k_range=k_range,
        t_prime=args.tprime,
        objective=args.objective,
        seed=args.seed,
        subsample=args.subsample,
        normalize=not args.no_normalize,
    )


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args, _parse_k_range(args.k))
    report = run_sweep(cfg)
    emit(report, "JSON", args.out)
    if args.csv:
        emit(report, "CSV", args.csv)
    return 0


def _cmd_decompose(args) -> int:
    cfg = _config_from_args(args, (1, 1))
    ds = load_csv(cfg)
    bal = balance_of_dataset(ds)
    if bal < Fraction(1, cfg.t_prime):
        raise fl.InfeasibleBalanceError(
            f"dataset balance {bal} is below 1/{cfg.t_prime}")
    out = {"metadata": {"n": ds.n, "n_red": int(len(ds.red_ids)),
                        "n_blue": int(len(ds.blue_ids)),
                        "dataset_balance": float(bal),
                        "t_prime": cfg.t_prime}}
    for obj in cfg.objectives():
        dec = decompose_for_objective(ds, cfg.t_prime, obj)
        out[obj.value.lower()] = {
            "cost": fl.decomposition_cost(ds, dec, obj),
            "fairlet_count": dec.size,
            "fairlets": [{"center": f.center, "members": list(f.members)}
                         for f in dec.fairlets],
        }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def main(argv=None) -> int:
    parser = _Parser(prog="faircluster",
                     description="balance-constrained clustering via fairlets")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="classical vs fair sweep over k")
    _add_common(p_sweep)
    p_sweep.add_argument("--k", required=True,
                         help="k or inclusive range like 2..20")
    p_sweep.add_argument("--csv", default=None, help="optional CSV output path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_dec = sub.add_parser("decompose", help="fairlet decomposition only")
    _add_common(p_dec)
    p_dec.set_defaults(func=_cmd_decompose)

    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except fl.InfeasibleBalanceError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
