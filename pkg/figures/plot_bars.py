#!/usr/bin/env python3
"""Per-method metric bars (mean over seeds, seed scatter overlaid) from
a summary CSV with method,seed and one column per metric.

  python plot_bars.py summary.csv -o bars.png
"""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from figlib import load_csv, standard_parser

ORDER = ["vis", "vi", "chivi", "vbis", "iwae"]
COLORS = {"vis": "tab:red", "vi": "tab:blue", "chivi": "tab:green",
          "vbis": "tab:purple", "iwae": "tab:brown"}


def main():
    args = standard_parser(__doc__).parse_args()
    rows = load_csv(args.input, ["method", "seed"])
    metrics = [c for c in rows[0].keys() if c not in ("method", "seed")]
    if not metrics:
        raise SystemExit(f"{args.input}: no metric columns beyond method,seed")
    methods = [m for m in ORDER if any(r["method"] == m for r in rows)]
    methods += sorted({r["method"] for r in rows} - set(methods))

    fig, axes = plt.subplots(1, len(metrics), figsize=(3.2 * len(metrics), 3.4),
                             squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        for i, method in enumerate(methods):
            vals = [float(r[metric]) for r in rows
                    if r["method"] == method and r[metric] != ""]
            if not vals:
                continue
            color = COLORS.get(method, "gray")
            ax.bar(i, np.mean(vals), color=color, alpha=0.7)
            ax.plot([i] * len(vals), vals, "k.", ms=4)
        ax.set_xticks(range(len(methods)))
        ax.set_xticklabels(methods, rotation=30)
        ax.set_title(metric)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
