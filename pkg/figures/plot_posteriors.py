#!/usr/bin/env python3
"""Posterior overlays per conditioning value: true posterior (dashed),
learned posterior (solid), proposal density (dotted), from a
posterior-grid CSV.

  python plot_posteriors.py posterior_grid.csv -o posteriors.png
"""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from figlib import floats, load_csv, standard_parser


def main():
    args = standard_parser(__doc__).parse_args()
    rows = load_csv(args.input, ["x", "z", "true_posterior",
                                 "learned_posterior", "proposal"])
    xs = sorted({r["x"] for r in rows})
    fig, axes = plt.subplots(1, len(xs), figsize=(5 * len(xs), 3.6),
                             squeeze=False)
    for ax, x in zip(axes[0], xs):
        sub = [r for r in rows if r["x"] == x]
        z = floats(sub, "z")
        ax.plot(z, floats(sub, "true_posterior"), "k--", lw=1.5,
                label="true posterior")
        ax.plot(z, floats(sub, "learned_posterior"), "-", color="tab:red",
                lw=1.5, label="learned posterior")
        ax.plot(z, floats(sub, "proposal"), ":", color="tab:blue", lw=1.5,
                label="proposal")
        ax.set_title(f"x = {x}")
        ax.set_xlabel("z")
        ax.set_ylabel("density")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
