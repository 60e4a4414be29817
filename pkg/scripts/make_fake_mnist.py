#!/usr/bin/env python3
"""Generate IDX image/label files with synthetic digit-like images.

Stand-in corpus for environments without the canonical handwriting
files; identical byte format, value range, and 28x28 geometry.

  python scripts/make_fake_mnist.py --out data/ --train 6000 --test 1000
"""
import argparse
import os

from vislearn import dataio
from vislearn.rng import RngStream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    ap.add_argument("--train", type=int, default=6000)
    ap.add_argument("--test", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    root = RngStream(args.seed)
    for split, n, sid in (("train", args.train, 0), ("t10k", args.test, 1)):
        images, labels = dataio.synthetic_digits(n, root.child(sid))
        dataio.write_mnist_idx(
            os.path.join(args.out, f"{split}-images-idx3-ubyte"),
            os.path.join(args.out, f"{split}-labels-idx1-ubyte"),
            images, labels)
        print(f"wrote {n} {split} images")


if __name__ == "__main__":
    main()
