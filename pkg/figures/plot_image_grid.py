#!/usr/bin/env python3
"""Image grids from wide pixel CSVs.

Accepts either a manifold CSV (z1,z2,p0..p783: one decoded image per
latent grid point, tiled by latent position) or a reconstruction CSV
(index,kind,p0..p783: raw/recon image pairs side by side).

  python plot_image_grid.py manifold.csv -o manifold.png
  python plot_image_grid.py recon.csv -o recon.png
"""
import csv

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from figlib import SchemaError, load_csv, standard_parser, wide_columns


def _pixels(row, cols):
    side = int(round(len(cols) ** 0.5))
    return np.array([float(row[c]) for c in cols]).reshape(side, side)


def plot_manifold(rows, cols, output):
    z1s = sorted({float(r["z1"]) for r in rows})
    z2s = sorted({float(r["z2"]) for r in rows})
    side = int(round(len(cols) ** 0.5))
    canvas = np.ones((side * len(z2s), side * len(z1s)))
    lookup = {(float(r["z1"]), float(r["z2"])): r for r in rows}
    for i, z1 in enumerate(z1s):
        for j, z2 in enumerate(z2s):   # top row = largest z2
            img = _pixels(lookup[(z1, z2)], cols)
            r0 = (len(z2s) - 1 - j) * side
            canvas[r0:r0 + side, i * side:(i + 1) * side] = img
    fig, ax = plt.subplots(figsize=(0.35 * len(z1s), 0.35 * len(z2s)))
    ax.imshow(canvas, cmap="gray_r", vmin=0, vmax=1)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_xlabel("latent dim 1")
    ax.set_ylabel("latent dim 2")
    fig.savefig(output, dpi=150, bbox_inches="tight")


def plot_recon(rows, cols, output):
    indices = sorted({r["index"] for r in rows}, key=int)
    fig, axes = plt.subplots(2, len(indices),
                             figsize=(1.1 * len(indices), 2.4), squeeze=False)
    for col_i, idx in enumerate(indices):
        for row_i, kind in enumerate(("raw", "recon")):
            match = [r for r in rows if r["index"] == idx and r["kind"] == kind]
            if not match:
                raise SchemaError(f"missing {kind} row for index {idx}")
            ax = axes[row_i][col_i]
            ax.imshow(_pixels(match[0], cols), cmap="gray_r", vmin=0, vmax=1)
            ax.set_xticks([])
            ax.set_yticks([])
            if col_i == 0:
                ax.set_ylabel(kind)
    fig.savefig(output, dpi=150, bbox_inches="tight")


def main():
    args = standard_parser(__doc__).parse_args()
    cols = wide_columns(args.input, "p")
    if not cols:
        raise SchemaError(f"{args.input}: no pixel columns p0, p1, ...")
    with open(args.input, newline="") as fh:
        header = csv.DictReader(fh).fieldnames or []
    if "kind" in header:
        rows = load_csv(args.input, ["index", "kind"] + cols)
        plot_recon(rows, cols, args.output)
    else:
        rows = load_csv(args.input, ["z1", "z2"] + cols)
        plot_manifold(rows, cols, args.output)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
