#!/usr/bin/env python3
"""Connectivity heatmap from an exported weight CSV: the bias column is
drawn separated from the weight matrix, and divider lines split the
four coupling blocks (visible/hidden senders and receivers).

  python plot_heatmap.py weights.csv -o weights.png
"""
import csv

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from figlib import SchemaError, standard_parser


def load_weight_table(path):
    with open(path, newline="") as fh:
        sidecar = fh.readline().strip()
        if sidecar != "V,H":
            raise SchemaError(f"{path}: expected V,H sidecar, got {sidecar!r}")
        v, h = (int(c) for c in fh.readline().strip().split(","))
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        n = v + h
        needed = ["n", "b"] + [f"w{j}" for j in range(n)]
        missing = [c for c in needed if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = sorted(reader, key=lambda r: int(r["n"]))
        b = np.array([float(r["b"]) for r in rows])
        w = np.array([[float(r[f"w{j}"]) for j in range(n)] for r in rows])
    return v, h, b, w


def main():
    args = standard_parser(__doc__).parse_args()
    v, h, b, w = load_weight_table(args.input)
    n = v + h
    scale = max(np.abs(w).max(), np.abs(b).max(), 1e-12)
    fig, (ax_b, ax_w) = plt.subplots(
        1, 2, figsize=(1.2 + 0.45 * n, 0.6 + 0.45 * n),
        gridspec_kw={"width_ratios": [1, n], "wspace": 0.08})
    ax_b.imshow(b[:, None], cmap="RdBu_r", vmin=-scale, vmax=scale)
    ax_b.set_xticks([0])
    ax_b.set_xticklabels(["bias"])
    ax_b.set_yticks(range(n))
    im = ax_w.imshow(w, cmap="RdBu_r", vmin=-scale, vmax=scale)
    if 0 < v < n:
        ax_w.axvline(v - 0.5, color="black", lw=1.2)
        ax_w.axhline(v - 0.5, color="black", lw=1.2)
        ax_b.axhline(v - 0.5, color="black", lw=1.2)
    ax_w.set_yticks([])
    ax_w.set_xticks(range(n))
    ax_w.set_xlabel("presynaptic neuron")
    ax_b.set_ylabel("postsynaptic neuron")
    fig.colorbar(im, ax=ax_w, fraction=0.046)
    fig.savefig(args.output, dpi=150, bbox_inches="tight")
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
