"""Command-line interface.

Subcommands:
  simulate   generate one trajectory from a spec file and dump it as JSON
  mc         run a Monte Carlo plan and write a JSON summary
  calibrate  empirical null critical values for a plan
  figure     emit the data behind a named experiment
  bands      simultaneous margin bands from a logged trajectory file
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import estimators as est
from . import inference as inf
from .environment import ExperimentSpec, Trajectory, generate_trajectory
from .harness import (FIGURES, McPlan, calibrate_cutoffs, monte_carlo,
                      reproduce_figure, reports_csv_rows, write_raw_statistics,
                      _write_csv)


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _dump_json(path: str, doc: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def _plan_from_args(args) -> McPlan:
    plan = McPlan.from_json(_load_json(args.config))
    if args.seed is not None:
        plan.spec.seed = args.seed
    if args.reps is not None:
        plan.reps = args.reps
    if args.alpha is not None:
        plan.alpha = args.alpha
    if args.raw:
        plan.raw = True
    if args.workers is not None:
        plan.workers = args.workers
    return plan


def cmd_simulate(args) -> int:
    spec = ExperimentSpec.from_json(_load_json(args.config))
    if args.seed is not None:
        spec.seed = args.seed
    traj = generate_trajectory(spec, rep=args.rep)
    out = args.out or "."
    _dump_json(os.path.join(out, "trajectory.json"), traj.to_json())
    batch = est.batch_estimates(traj)
    pooled = []
    sigma2 = None
    try:
        sigma2 = est.pooled_sigma2(traj)
        pooled.append(est.ols_z_statistic(traj, 0.0, sigma2))
        pooled.append(est.aw_aipw_report(traj))
    except ValueError:
        pass
    _write_csv(os.path.join(out, "reports.csv"),
               ["estimator", "t", "estimate", "scale", "statistic", "valid", "reason"],
               reports_csv_rows(batch, pooled))
    print(os.path.join(out, "trajectory.json"))
    return 0


def cmd_mc(args) -> int:
    plan = _plan_from_args(args)
    summary = monte_carlo(plan)
    out = args.out or "."
    _dump_json(os.path.join(out, "summary.json"), summary.to_json())
    if plan.raw and summary.raw_statistics is not None:
        write_raw_statistics(os.path.join(out, "raw_statistics.csv"),
                             summary.raw_statistics)
    print(os.path.join(out, "summary.json"))
    return 0


def cmd_calibrate(args) -> int:
    plan = _plan_from_args(args)
    cutoffs = calibrate_cutoffs(plan)
    out = args.out or "."
    _dump_json(os.path.join(out, "cutoffs.json"), cutoffs)
    print(os.path.join(out, "cutoffs.json"))
    return 0


def cmd_figure(args) -> int:
    out = args.out or "."
    paths = reproduce_figure(args.name, reps=args.reps or 10_000, out_dir=out,
                             seed=args.seed or 0, alpha=args.alpha or 0.05,
                             workers=args.workers or 1)
    for p in paths:
        print(p)
    return 0


def cmd_bands(args) -> int:
    traj = Trajectory.from_json(_load_json(args.config))
    alpha = args.alpha or 0.05
    batches = est.batch_estimates(traj, with_sigma2=not traj.spec.sigma_known)
    sigma2 = None
    if traj.spec.sigma_known:
        sig = traj.spec.noise_sigma2
        sigma2 = float(sig if isinstance(sig, (int, float)) else sum(sig) / len(sig))
    band_set = inf.simultaneous_bands(batches, alpha, sigma2=sigma2)
    out = args.out or "."
    rows = list(zip(band_set.t_index, band_set.lower, band_set.upper))
    path = _write_csv(os.path.join(out, "bands.csv"), ["t", "lo", "hi"], rows)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="batchbandit",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="input JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--raw", action="store_true")
        p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("simulate", help="generate and dump one trajectory")
    common(p)
    p.add_argument("--rep", type=int, default=0, help="replication index")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="run a Monte Carlo plan")
    common(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("calibrate", help="null-calibrated critical values")
    common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("figure", help="emit data behind a named experiment")
    p.add_argument("name", choices=FIGURES)
    common(p, needs_config=False)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("bands", help="simultaneous bands from a trajectory file")
    common(p)
    p.set_defaults(func=cmd_bands)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
