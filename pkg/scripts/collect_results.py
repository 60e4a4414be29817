#!/usr/bin/env python3
"""Aggregate training-run directories into combined CSVs for plotting.

Each run directory must hold trainlog.csv and resolved-config.ini (as
written by `vislearn train`). Produces:

  curves.csv  - method,seed,epoch,objective,ll,cll,hll
  summary.csv - method,seed,ll,cll,hll[,bias_error,weight_error]

With --theta-true and poglm runs, parameter errors are computed from
each run's theta.ckpt against the ground-truth checkpoint.

  python scripts/collect_results.py out/run-* -o out/combined
"""
import argparse
import configparser
import os

from vislearn import dataio
from vislearn.models import parameter_error
from vislearn.training import TrainLog


def run_identity(run_dir):
    cp = configparser.ConfigParser(interpolation=None)
    cp.read(os.path.join(run_dir, "resolved-config.ini"))
    return cp.get("train", "method"), cp.get("train", "seed")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("runs", nargs="+")
    ap.add_argument("-o", "--out", required=True)
    ap.add_argument("--theta-true", default=None)
    ap.add_argument("--visible", type=int, default=None,
                    help="visible-neuron count for parameter-error blocks")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    theta_true = dataio.read_checkpoint(args.theta_true) if args.theta_true else None

    curves = open(os.path.join(args.out, "curves.csv"), "w")
    summary = open(os.path.join(args.out, "summary.csv"), "w")
    curves.write("method,seed,epoch,objective,ll,cll,hll\n")
    err_cols = ",bias_error,weight_error" if theta_true is not None else ""
    summary.write(f"method,seed,ll,cll,hll{err_cols}\n")

    def cell(v):
        return "" if v is None else repr(float(v))

    for run_dir in args.runs:
        method, seed = run_identity(run_dir)
        log = TrainLog.read_csv(os.path.join(run_dir, "trainlog.csv"))
        for row in log.rows:
            curves.write(f"{method},{seed},{row['epoch']},{cell(row['objective'])},"
                         f"{cell(row['ll'])},{cell(row['cll'])},{cell(row['hll'])}\n")
        last = log.rows[-1]
        line = (f"{method},{seed},{cell(last['ll'])},{cell(last['cll'])},"
                f"{cell(last['hll'])}")
        if theta_true is not None:
            theta = dataio.read_checkpoint(os.path.join(run_dir, "theta.ckpt"))
            visible = args.visible
            if visible is None:
                raise SystemExit("--visible is required with --theta-true")
            err = parameter_error(theta, theta_true, visible)
            line += f",{err['bias_error']!r},{err['weight_error']!r}"
        summary.write(line + "\n")
    curves.close()
    summary.close()
    print(f"wrote {args.out}/curves.csv and {args.out}/summary.csv")


if __name__ == "__main__":
    main()
