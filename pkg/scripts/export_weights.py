#!/usr/bin/env python3
"""Export a spiking-network checkpoint as a CSV weight table for the
heatmap figure: a V,H sidecar, then one row per neuron with its bias
followed by its incoming weights.

  python scripts/export_weights.py out/run/theta.ckpt --visible 3 -o weights.csv
"""
import argparse

from vislearn import dataio


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("checkpoint")
    ap.add_argument("--visible", type=int, required=True)
    ap.add_argument("-o", "--out", required=True)
    args = ap.parse_args()
    params = dataio.read_checkpoint(args.checkpoint)
    b = params.segment("b")
    w = params.segment("W")
    n = b.shape[0]
    if not 0 <= args.visible <= n:
        raise SystemExit(f"--visible {args.visible} out of range for {n} neurons")
    with open(args.out, "w") as fh:
        fh.write("V,H\n")
        fh.write(f"{args.visible},{n - args.visible}\n")
        fh.write("n,b," + ",".join(f"w{j}" for j in range(n)) + "\n")
        for i in range(n):
            cells = ",".join(repr(float(v)) for v in w[i])
            fh.write(f"{i},{float(b[i])!r},{cells}\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
