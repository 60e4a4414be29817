"""Experiment command line.

Subcommands: simulate, train, eval, bias-lab, posterior-grid, manifold,
recon. Every command takes --config PATH plus optional --seed and --out
overrides, writes its outputs (CSV + text checkpoints) into the output
directory, and echoes the resolved configuration beside them.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
abort.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import dataio
from .config import (ExperimentConfig, build_model, enumerable_theta,
                     load_config, mixture_true_params)
from .core import sigmoid
from .errors import CapabilityError, ConfigError, DataError, NumericError
from .estimators import SampleBatch, elbo_hat, ln_p_hat
from .models import simulate_mixture
from .rng import RngStream
from .training import ExperimentData, evaluate, train

# rng stream ids for data generation
_G_THETA, _G_TRAIN, _G_TEST = 10, 11, 12


def sample_poglm_weights(gen, n, visible, w_scale=0.3, structured=False):
    """Ground-truth coupling matrix for simulation. The structured mode
    gives hidden neurons strong signed drive onto the visibles (and
    moderate drive back), the regime where inferring hidden activity
    actually matters for prediction; hidden-to-hidden stays weak so the
    network cannot run away."""
    w = gen.normal(0.0, w_scale, size=(n, n))
    if structured:
        h = n - visible
        signs_hv = np.where(gen.uniform(size=(visible, h)) < 0.5, -1.0, 1.0)
        signs_vh = np.where(gen.uniform(size=(h, visible)) < 0.5, -1.0, 1.0)
        w[:visible, visible:] = 0.55 * signs_hv
        w[visible:, :visible] = 0.40 * signs_vh
        w[visible:, visible:] = gen.normal(0.0, 0.1, size=(h, h))
    return w


def _out_dir(cfg: ExperimentConfig) -> str:
    out = cfg.get("output", "dir", required=True)
    os.makedirs(out, exist_ok=True)
    return out


def _echo(cfg: ExperimentConfig, out: str):
    cfg.write_resolved(os.path.join(out, "resolved-config.ini"))


def cmd_simulate(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    root = RngStream(cfg.seed)
    if cfg.model_kind == "mixture":
        theta = mixture_true_params(cfg)
        n_train = int(cfg.get("data", "train_size", required=True))
        n_test = int(cfg.get("data", "test_size", required=True))
        xtr, ztr = simulate_mixture(theta, n_train, root.child(_G_TRAIN))
        xte, zte = simulate_mixture(theta, n_test, root.child(_G_TEST))
        dataio.write_mixture_csv(os.path.join(out, "train.csv"), xtr, ztr)
        dataio.write_mixture_csv(os.path.join(out, "test.csv"), xte, zte)
        dataio.write_checkpoint(os.path.join(out, "theta_true.ckpt"), theta)
        model, _ = build_model(cfg)
        with open(os.path.join(out, "gen_log_joint.csv"), "w") as fh:
            fh.write("index,log_joint\n")
            for i, (x, z) in enumerate(zip(xte, zte)):
                fh.write(f"{i},{model.log_joint(int(x), float(z), theta)!r}\n")
    elif cfg.model_kind == "poglm":
        model, _ = build_model(cfg)
        w_scale = float(cfg.get("model", "sim_w_scale", 0.3))
        b_low = float(cfg.get("model", "sim_b_low", -1.0))
        b_high = float(cfg.get("model", "sim_b_high", 0.0))
        structured = bool(cfg.get("model", "sim_structured", 0))
        gen = root.child(_G_THETA)
        theta = model.init_params(gen)
        theta.segment("b")[:] = gen.uniform(b_low, b_high, size=model.n)
        theta.segment("W")[:] = sample_poglm_weights(gen, model.n, model.visible,
                                                     w_scale, structured)
        if structured:
            h = model.n - model.visible
            theta.segment("b")[model.visible:] = gen.uniform(-0.5, 0.0, size=h)
        t_len = int(cfg.get("data", "train_len", 100))
        n_train = int(cfg.get("data", "train_trains", required=True))
        n_test = int(cfg.get("data", "test_trains", required=True))
        for split, n, sid in (("train", n_train, _G_TRAIN), ("test", n_test, _G_TEST)):
            split_dir = os.path.join(out, split)
            os.makedirs(split_dir, exist_ok=True)
            for i in range(n):
                train_i = model.simulate_train(theta, t_len, root.child(sid, i))
                dataio.write_spike_train_csv(
                    os.path.join(split_dir, f"{i:03d}.csv"), train_i)
        dataio.write_checkpoint(os.path.join(out, "theta_true.ckpt"), theta)
        with open(os.path.join(out, "gen_log_joint.csv"), "w") as fh:
            fh.write("index,log_joint\n")
            for i in range(n_test):
                tr = dataio.read_spike_train_csv(
                    os.path.join(out, "test", f"{i:03d}.csv"))
                lj = model.log_joint(tr.x, tr.z, theta)
                fh.write(f"{i},{lj!r}\n")
    else:
        raise ConfigError(f"simulate does not support model kind {cfg.model_kind!r}")
    _echo(cfg, out)
    return 0


def load_experiment_data(cfg: ExperimentConfig, model) -> ExperimentData:
    kind = cfg.model_kind
    if kind == "mixture":
        d = cfg.get("data", "dir", required=True)
        xtr, _ = dataio.read_mixture_csv(os.path.join(d, "train.csv"))
        xte, zte = dataio.read_mixture_csv(os.path.join(d, "test.csv"))
        return ExperimentData([int(v) for v in xtr], [int(v) for v in xte],
                              [float(v) for v in zte])
    if kind == "poglm":
        spike_times = cfg.get("data", "spike_times")
        if spike_times:
            events = dataio.read_spike_times_csv(spike_times)
            binned = dataio.bin_spike_times(events,
                                            float(cfg.get("data", "bin_ms", 50.0)),
                                            max(s for _, s in events))
            if binned.n != model.visible:
                raise ConfigError(
                    f"binned data has {binned.n} neurons but the model "
                    f"declares visible={model.visible}")
            piece_len = int(cfg.get("data", "piece_len", 100))
            if piece_len < model.basis.length + 1:
                raise ConfigError("piece_len must exceed the basis length")
            frac = float(cfg.get("data", "train_frac", 2.0 / 3.0))
            t_split = int(binned.t * frac)
            from .models.poglm import SpikeTrain
            head = SpikeTrain(binned.y[:t_split], binned.visible)
            tail = SpikeTrain(binned.y[t_split:], binned.visible)
            train_pieces = dataio.split_into_pieces(head, piece_len)
            test_pieces = dataio.split_into_pieces(tail, piece_len)
            return ExperimentData([p.y for p in train_pieces],
                                  [p.y for p in test_pieces])
        d = cfg.get("data", "dir", required=True)
        def read_split(name):
            split_dir = os.path.join(d, name)
            files = sorted(f for f in os.listdir(split_dir) if f.endswith(".csv"))
            return [dataio.read_spike_train_csv(os.path.join(split_dir, f))
                    for f in files]
        trains = read_split("train")
        tests = read_split("test")
        return ExperimentData([t.x for t in trains], [t.x for t in tests],
                              [t.z for t in tests])
    if kind == "vae":
        images = cfg.get("data", "images", required=True)
        labels = cfg.get("data", "labels", required=True)
        train_set = dataio.load_mnist_idx(images, labels)
        test_set = dataio.load_mnist_idx(cfg.get("data", "test_images", required=True),
                                         cfg.get("data", "test_labels", required=True))
        n_tr = cfg.get("data", "train_subset")
        n_te = cfg.get("data", "test_subset")
        tr = train_set.images[:n_tr] if n_tr else train_set.images
        te = test_set.images[:n_te] if n_te else test_set.images
        return ExperimentData(list(tr), list(te))
    raise ConfigError(f"no dataset loader for model kind {kind!r}")


def cmd_train(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    model, proposal = build_model(cfg)
    tc = cfg.train_config()
    tc.validate(proposal)
    data = load_experiment_data(cfg, model)
    cadence = int(cfg.get("train", "checkpoint_every", 0))

    def hook(epoch, theta, phi):
        if cadence and epoch % cadence == 0:
            dataio.write_checkpoint(
                os.path.join(out, f"theta_epoch{epoch:04d}.ckpt"), theta)
            dataio.write_checkpoint(
                os.path.join(out, f"phi_epoch{epoch:04d}.ckpt"), phi)

    theta, phi, log = train(model, proposal, data, tc, epoch_hook=hook)
    log.write_csv(os.path.join(out, "trainlog.csv"))
    dataio.write_checkpoint(os.path.join(out, "theta.ckpt"), theta)
    dataio.write_checkpoint(os.path.join(out, "phi.ckpt"), phi)
    _echo(cfg, out)
    return 0


def cmd_eval(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    model, proposal = build_model(cfg)
    tc = cfg.train_config()
    data = load_experiment_data(cfg, model)
    theta = dataio.read_checkpoint(cfg.get("eval", "theta", required=True))
    phi = dataio.read_checkpoint(cfg.get("eval", "phi", required=True))
    metrics = evaluate(model, proposal, theta, phi, data.test, tc.eval_k,
                       RngStream(tc.seed, (99,)), data.test_latents)
    with open(os.path.join(out, "eval.csv"), "w") as fh:
        fh.write("method,seed,ll,cll,hll\n")
        cll = "" if metrics["cll"] is None else repr(metrics["cll"])
        hll = "" if metrics["hll"] is None else repr(metrics["hll"])
        fh.write(f"{tc.method},{tc.seed},{metrics['ll']!r},{cll},{hll}\n")
    print(f"ll={metrics['ll']} cll={metrics['cll']} hll={metrics['hll']}")
    _echo(cfg, out)
    return 0


def cmd_bias_lab(cfg: ExperimentConfig) -> int:
    if cfg.model_kind != "enumerable":
        raise ConfigError(
            f"bias-lab needs the enumerable oracle model, got {cfg.model_kind!r}")
    out = _out_dir(cfg)
    model, proposal = build_model(cfg)
    theta = enumerable_theta(cfg, model)
    x = int(cfg.get("bias", "x", 1))
    blend = float(cfg.get("bias", "proposal_blend", 0.3))
    k_list = cfg.get("bias", "k_list", [1, 2, 5, 10, 50])
    repeats = int(cfg.get("bias", "repeats", 500))
    post = model.exact_posterior(x, theta)
    q = (1.0 - blend) * post + blend / model.m
    phi = proposal.make_params(q)
    exact_ln_p = model.exact_log_marginal(x, theta)
    exact_elbo = model.exact_elbo(x, theta, q)
    exact_chi2 = model.exact_chi2(x, theta, q)
    root = RngStream(cfg.seed)
    with open(os.path.join(out, "bias_lab.csv"), "w") as fh:
        fh.write("k,repeat,ln_p_hat,elbo_hat,exact_ln_p,exact_elbo,exact_chi2\n")
        for ki, k in enumerate(k_list):
            for rep in range(repeats):
                zs = proposal.sample(x, phi, k, root.child(ki, rep))
                batch = SampleBatch(model.log_joint_batch(x, zs, theta),
                                    proposal.log_density_batch(zs, x, phi), zs)
                fh.write(f"{k},{rep},{ln_p_hat(batch)!r},{elbo_hat(batch)!r},"
                         f"{exact_ln_p!r},{exact_elbo!r},{exact_chi2!r}\n")
    _echo(cfg, out)
    return 0


def cmd_posterior_grid(cfg: ExperimentConfig) -> int:
    if cfg.model_kind != "mixture":
        raise ConfigError("posterior-grid is a mixture-model report")
    out = _out_dir(cfg)
    model, proposal = build_model(cfg)
    theta_true = dataio.read_checkpoint(cfg.get("eval", "theta_true", required=True))
    theta_hat = dataio.read_checkpoint(cfg.get("eval", "theta", required=True))
    phi_hat = dataio.read_checkpoint(cfg.get("eval", "phi", required=True))
    lo = float(cfg.get("grid", "z_min", -12.0))
    hi = float(cfg.get("grid", "z_max", 12.0))
    points = int(cfg.get("grid", "points", 481))
    grid = np.linspace(lo, hi, points)
    with open(os.path.join(out, "posterior_grid.csv"), "w") as fh:
        fh.write("x,z,true_posterior,learned_posterior,proposal\n")
        for x in (0, 1):
            true_curve = model.posterior_curve(x, theta_true, grid)
            learned_curve = model.posterior_curve(x, theta_hat, grid)
            prop_curve = np.exp(proposal.log_density_batch(grid, x, phi_hat))
            for z, tv, lv, pv in zip(grid, true_curve, learned_curve, prop_curve):
                fh.write(f"{x},{float(z)!r},{float(tv)!r},{float(lv)!r},{float(pv)!r}\n")
    _echo(cfg, out)
    return 0


def cmd_manifold(cfg: ExperimentConfig) -> int:
    if cfg.model_kind != "vae":
        raise ConfigError("manifold is an autoencoder report")
    out = _out_dir(cfg)
    model, _ = build_model(cfg)
    theta = dataio.read_checkpoint(cfg.get("eval", "theta", required=True))
    lo = float(cfg.get("grid", "z_min", -3.0))
    hi = float(cfg.get("grid", "z_max", 3.0))
    points = int(cfg.get("grid", "points", 20))
    axis = np.linspace(lo, hi, points)
    header = "z1,z2," + ",".join(f"p{i}" for i in range(model.data_dim))
    with open(os.path.join(out, "manifold.csv"), "w") as fh:
        fh.write(header + "\n")
        for z1 in axis:
            for z2 in axis:
                probs = sigmoid(model.decode(np.array([z1, z2]), theta))
                cells = ",".join(repr(float(v)) for v in probs)
                fh.write(f"{float(z1)!r},{float(z2)!r},{cells}\n")
    _echo(cfg, out)
    return 0


def cmd_recon(cfg: ExperimentConfig) -> int:
    if cfg.model_kind != "vae":
        raise ConfigError("recon is an autoencoder report")
    out = _out_dir(cfg)
    model, proposal = build_model(cfg)
    theta = dataio.read_checkpoint(cfg.get("eval", "theta", required=True))
    phi = dataio.read_checkpoint(cfg.get("eval", "phi", required=True))
    test_set = dataio.load_mnist_idx(cfg.get("data", "test_images", required=True),
                                     cfg.get("data", "test_labels", required=True))
    indices = cfg.get("eval", "indices", list(range(8)))
    header = "index,kind," + ",".join(f"p{i}" for i in range(model.data_dim))
    with open(os.path.join(out, "recon.csv"), "w") as fh:
        fh.write(header + "\n")
        for idx in indices:
            if not 0 <= idx < test_set.images.shape[0]:
                raise DataError(f"recon index {idx} out of range")
            x = test_set.images[idx]
            mu, _, _, _ = proposal.encode(x, phi)
            rec = sigmoid(model.decode(mu, theta))
            raw_cells = ",".join(repr(float(v)) for v in x)
            rec_cells = ",".join(repr(float(v)) for v in rec)
            fh.write(f"{idx},raw,{raw_cells}\n")
            fh.write(f"{idx},recon,{rec_cells}\n")
    _echo(cfg, out)
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "eval": cmd_eval,
    "bias-lab": cmd_bias_lab,
    "posterior-grid": cmd_posterior_grid,
    "manifold": cmd_manifold,
    "recon": cmd_recon,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vislearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg.override(seed=args.seed, out_dir=args.out)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError, CapabilityError) as exc:
        code = 3 if not isinstance(exc, CapabilityError) else 2
        kind = "data" if code == 3 else "config"
        print(f"{kind} error: {exc}", file=sys.stderr)
        return code
    except NumericError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return 4


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
