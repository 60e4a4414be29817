#!/usr/bin/env python3
"""Paired per-K boxplots of the two log-marginal estimators from a
bias-lab CSV, with mean markers and the exact reference lines.

  python plot_bias_boxes.py bias_lab.csv -o bias.png
"""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from figlib import floats, load_csv, standard_parser


def main():
    args = standard_parser(__doc__).parse_args()
    rows = load_csv(args.input, ["k", "repeat", "ln_p_hat", "elbo_hat",
                                 "exact_ln_p", "exact_elbo"])
    ks = sorted({int(r["k"]) for r in rows})
    lnp_groups = [floats([r for r in rows if int(r["k"]) == k], "ln_p_hat")
                  for k in ks]
    elbo_groups = [floats([r for r in rows if int(r["k"]) == k], "elbo_hat")
                   for k in ks]
    exact_ln_p = float(rows[0]["exact_ln_p"])
    exact_elbo = float(rows[0]["exact_elbo"])

    fig, ax = plt.subplots(figsize=(7, 4))
    pos = range(1, len(ks) + 1)
    width = 0.32
    for groups, offset, color, label in (
            (lnp_groups, -width / 2, "tab:blue", "IS log-marginal"),
            (elbo_groups, +width / 2, "tab:orange", "empirical ELBO")):
        bp = ax.boxplot(groups, positions=[p + offset for p in pos],
                        widths=width * 0.9, patch_artist=True,
                        showmeans=True, meanprops=dict(
                            marker="o", markerfacecolor="white",
                            markeredgecolor=color, markersize=5))
        for box in bp["boxes"]:
            box.set(facecolor=color, alpha=0.45)
        for med in bp["medians"]:
            med.set(color="black")
    ax.axhline(exact_ln_p, color="tab:blue", ls="--", lw=1,
               label="exact log-marginal")
    ax.axhline(exact_elbo, color="tab:orange", ls=":", lw=1, label="exact ELBO")
    ax.set_xticks(list(pos))
    ax.set_xticklabels([str(k) for k in ks])
    ax.set_xlabel("Monte Carlo samples K")
    ax.set_ylabel("estimate")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
