#!/usr/bin/env python3
"""Drive a desk-scale experiment family end to end through the CLI:
simulate once, train every method over several seeds, aggregate.

  python scripts/run_desk_experiments.py mixture --seeds 3 --out out/desk
  python scripts/run_desk_experiments.py poglm --methods vis vi --seeds 5

Dataset simulation and per-run training go through `vislearn` proper,
so everything here is reproducible from the echoed configs.
"""
import argparse
import os
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
REPO = os.path.dirname(HERE)
PRESET = {
    "mixture": os.path.join(REPO, "configs", "mixture_desk.ini"),
    "poglm": os.path.join(REPO, "configs", "poglm_desk.ini"),
    "vae": os.path.join(REPO, "configs", "vae_desk.ini"),
}
ALL_METHODS = ("vis", "vi", "chivi", "vbis", "iwae")


def cli(*args):
    cmd = [sys.executable, "-m", "vislearn", *args]
    print("+", " ".join(cmd), flush=True)
    subprocess.run(cmd, check=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("family", choices=sorted(PRESET))
    ap.add_argument("--methods", nargs="+", default=list(ALL_METHODS))
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--out", default="out/desk")
    args = ap.parse_args()
    preset = PRESET[args.family]
    os.makedirs(args.out, exist_ok=True)

    data_dir = os.path.join(args.out, f"{args.family}-data")
    if args.family != "vae":
        cli("simulate", "--config", preset, "--out", data_dir)

    run_dirs = []
    for method in args.methods:
        if args.family == "poglm" and method == "iwae":
            print("skipping iwae for poglm (discrete latents)")
            continue
        for seed in range(args.seeds):
            run_dir = os.path.join(args.out, f"{args.family}-{method}-s{seed}")
            run_dirs.append(run_dir)
            # point the run at the shared simulated dataset
            import configparser
            cp = configparser.ConfigParser(interpolation=None)
            cp.read(preset)
            cp.set("train", "method", method)
            cp.set("train", "seed", str(seed))
            if args.family != "vae":
                cp.set("data", "dir", data_dir)
            run_cfg = os.path.join(args.out, f"{args.family}-{method}-s{seed}.ini")
            with open(run_cfg, "w") as fh:
                cp.write(fh)
            cli("train", "--config", run_cfg, "--out", run_dir)

    collect = [sys.executable, os.path.join(HERE, "collect_results.py"),
               *run_dirs, "-o", os.path.join(args.out, "combined")]
    if args.family == "poglm":
        cp = __import__("configparser").ConfigParser(interpolation=None)
        cp.read(preset)
        collect += ["--theta-true", os.path.join(data_dir, "theta_true.ckpt"),
                    "--visible", cp.get("model", "visible")]
    print("+", " ".join(collect), flush=True)
    subprocess.run(collect, check=True)


if __name__ == "__main__":
    main()
