#!/usr/bin/env python3
"""Test log-likelihood against training epoch, one curve per method
(seeds averaged, individual seeds faint), from a combined curves CSV
(method,seed,epoch,...,ll) or a single run's trainlog.csv.

  python plot_curves.py curves.csv -o curves.png
"""
import csv
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from figlib import load_csv, standard_parser

COLORS = {"vis": "tab:red", "vi": "tab:blue", "chivi": "tab:green",
          "vbis": "tab:purple", "iwae": "tab:brown"}


def main():
    args = standard_parser(__doc__).parse_args()
    with open(args.input, newline="") as fh:
        header = csv.DictReader(fh).fieldnames or []
    if "method" in header:
        rows = load_csv(args.input, ["method", "seed", "epoch", "ll"])
    else:   # a bare trainlog: single anonymous method
        rows = load_csv(args.input, ["epoch", "ll"])
        for r in rows:
            r["method"], r["seed"] = "run", "0"

    fig, ax = plt.subplots(figsize=(6, 4))
    by_method = defaultdict(lambda: defaultdict(dict))
    for r in rows:
        if r["ll"] == "":
            continue
        by_method[r["method"]][r["seed"]][int(r["epoch"])] = float(r["ll"])
    for method, seeds in by_method.items():
        color = COLORS.get(method, None)
        epochs = sorted({e for s in seeds.values() for e in s})
        for seed_vals in seeds.values():
            es = sorted(seed_vals)
            ax.plot(es, [seed_vals[e] for e in es], color=color, alpha=0.25, lw=0.8)
        means = [np.mean([s[e] for s in seeds.values() if e in s]) for e in epochs]
        ax.plot(epochs, means, color=color, lw=2, label=method)
    ax.set_xlabel("epoch")
    ax.set_ylabel("test log-likelihood")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
