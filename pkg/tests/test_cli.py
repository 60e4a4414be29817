import os

import numpy as np
import pytest

from vislearn import dataio
from vislearn.cli import main

from vislearn.rng import RngStream
from vislearn.training import TrainLog


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)
    return str(path)


def _mixture_cfg(tmp_path, out, data_dir, method="vis", epochs=2, n=60,
                 k=20, seed=1):
    return _write(tmp_path / f"{method}_{out}.ini", f"""
[model]
kind = mixture
pi_true = 0.4
mu_true = -6.0 -2.0 1.0 3.0

[train]
method = {method}
k = {k}
eval_k = 50
lr = 0.01
epochs = {epochs}
batch_size = 10
seed = {seed}

[data]
dir = {data_dir}
train_size = {n}
test_size = {n}

[output]
dir = {tmp_path / out}
""")


def _read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_simulate_same_seed_identical_files(tmp_path):
    cfg = _mixture_cfg(tmp_path, "sim", tmp_path / "d")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("train.csv", "test.csv", "theta_true.ckpt", "gen_log_joint.csv"):
        assert _read_bytes(tmp_path / "a" / name) == _read_bytes(tmp_path / "b" / name)


def test_simulate_seed_override_changes_data(tmp_path):
    cfg = _mixture_cfg(tmp_path, "sim2", tmp_path / "d")
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["simulate", "--config", cfg, "--seed", "99", "--out", str(tmp_path / "b")])
    assert _read_bytes(tmp_path / "a" / "train.csv") != \
        _read_bytes(tmp_path / "b" / "train.csv")


def test_unknown_config_key_rejected(tmp_path):
    cfg = _write(tmp_path / "bad.ini", """
[model]
kind = mixture
pi_true = 0.4
mu_true = 0 0 0 0
volume = 11
[train]
method = vi
k = 1
eval_k = 1
lr = 0.1
epochs = 1
batch_size = 1
seed = 0
[output]
dir = out
""")
    assert main(["train", "--config", cfg]) == 2


def test_unknown_section_rejected(tmp_path):
    cfg = _write(tmp_path / "bad2.ini", """
[model]
kind = mixture
pi_true = 0.4
mu_true = 0 0 0 0
[extra]
x = 1
[output]
dir = out
""")
    assert main(["simulate", "--config", cfg]) == 2


def test_train_writes_log_and_checkpoints(tmp_path):
    data_dir = tmp_path / "data"
    sim = _mixture_cfg(tmp_path, "sim3", data_dir)
    assert main(["simulate", "--config", sim, "--out", str(data_dir)]) == 0
    cfg = _mixture_cfg(tmp_path, "run", data_dir, method="vis", epochs=3)
    assert main(["train", "--config", cfg]) == 0
    out = tmp_path / "run"
    log = TrainLog.read_csv(out / "trainlog.csv")
    assert [r["epoch"] for r in log.rows] == [1, 2, 3]
    theta = dataio.read_checkpoint(out / "theta.ckpt")
    assert set(theta.segment_names()) == {"raw_pi", "mu"}
    assert os.path.exists(out / "resolved-config.ini")


def test_train_checkpoint_cadence(tmp_path):
    data_dir = tmp_path / "data"
    sim = _mixture_cfg(tmp_path, "simc", data_dir)
    main(["simulate", "--config", sim, "--out", str(data_dir)])
    cfg = _mixture_cfg(tmp_path, "cad", data_dir, epochs=4)
    with open(cfg) as fh:
        text = fh.read()
    cfg2 = _write(tmp_path / "cad.ini",
                  text.replace("[data]", "checkpoint_every = 2\n\n[data]"))
    assert main(["train", "--config", cfg2, "--out", str(tmp_path / "cadout")]) == 0
    names = sorted(os.listdir(tmp_path / "cadout"))
    assert "theta_epoch0002.ckpt" in names
    assert "theta_epoch0004.ckpt" in names
    assert "theta_epoch0003.ckpt" not in names


def test_numeric_abort_is_exit_4(tmp_path):
    data_dir = tmp_path / "data"
    sim = _mixture_cfg(tmp_path, "simn", data_dir)
    main(["simulate", "--config", sim, "--out", str(data_dir)])
    cfg = _mixture_cfg(tmp_path, "blow", data_dir, epochs=3)
    with open(cfg) as fh:
        text = fh.read()
    cfg2 = _write(tmp_path / "blow.ini", text.replace("lr = 0.01", "lr = 1e18"))
    assert main(["train", "--config", cfg2]) == 4


def test_train_reproducible_checkpoint_bytes(tmp_path):
    data_dir = tmp_path / "data"
    sim = _mixture_cfg(tmp_path, "simr", data_dir)
    main(["simulate", "--config", sim, "--out", str(data_dir)])
    cfg = _mixture_cfg(tmp_path, "rep", data_dir, epochs=2)
    main(["train", "--config", cfg, "--out", str(tmp_path / "r1")])
    main(["train", "--config", cfg, "--out", str(tmp_path / "r2")])
    for name in ("theta.ckpt", "phi.ckpt"):
        assert _read_bytes(tmp_path / "r1" / name) == \
            _read_bytes(tmp_path / "r2" / name)


def test_train_missing_data_is_exit_3(tmp_path):
    cfg = _mixture_cfg(tmp_path, "nodata", tmp_path / "missing")
    assert main(["train", "--config", cfg]) == 3


def test_iwae_poglm_rejected_exit_2(tmp_path):
    cfg = _write(tmp_path / "ip.ini", f"""
[model]
kind = poglm
visible = 2
hidden = 1

[train]
method = iwae
k = 5
eval_k = 5
lr = 0.01
epochs = 1
batch_size = 1
seed = 0

[data]
dir = {tmp_path / "pd"}
train_trains = 2
test_trains = 1
train_len = 20

[output]
dir = {tmp_path / "ipo"}
""")
    assert main(["simulate", "--config", cfg]) == 0
    cfg2 = cfg.replace("ip.ini", "ip.ini")
    assert main(["train", "--config", cfg2,
                 "--out", str(tmp_path / "ipo2")]) == 2


def test_poglm_simulate_train_eval_roundtrip(tmp_path):
    cfg = _write(tmp_path / "pg.ini", f"""
[model]
kind = poglm
visible = 2
hidden = 1

[train]
method = vis
k = 10
eval_k = 10
lr = 0.02
epochs = 2
batch_size = 2
seed = 3

[data]
dir = {tmp_path / "pgd"}
train_trains = 4
test_trains = 2
train_len = 30

[output]
dir = {tmp_path / "pgo"}
""")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "pgd")]) == 0
    assert main(["train", "--config", cfg]) == 0
    log = TrainLog.read_csv(tmp_path / "pgo" / "trainlog.csv")
    assert len(log.rows) == 2
    assert all(np.isfinite(r["cll"]) for r in log.rows)
    # the generation-time log-joint record matches CLL recomputed at theta_true
    import csv
    with open(tmp_path / "pgd" / "gen_log_joint.csv") as fh:
        rows = list(csv.DictReader(fh))
    theta_true = dataio.read_checkpoint(tmp_path / "pgd" / "theta_true.ckpt")
    from vislearn.models import PoglmModel
    model = PoglmModel(2, 1)
    for i, row in enumerate(rows):
        tr = dataio.read_spike_train_csv(tmp_path / "pgd" / "test" / f"{i:03d}.csv")
        assert model.log_joint(tr.x, tr.z, theta_true) == \
            pytest.approx(float(row["log_joint"]), abs=1e-10)


def _bias_cfg(tmp_path, k_list="1 2 5", repeats=40):
    return _write(tmp_path / "bias.ini", f"""
[model]
kind = enumerable
grid_points = 21
grid_min = -6.0
grid_max = 6.0

[train]
method = vis
k = 1
eval_k = 1
lr = 0.01
epochs = 1
batch_size = 1
seed = 5

[bias]
k_list = {k_list}
repeats = {repeats}
x = 1
proposal_blend = 0.3

[output]
dir = {tmp_path / "bias"}
""")


def test_bias_lab_k1_identity_and_schema(tmp_path):
    cfg = _bias_cfg(tmp_path)
    assert main(["bias-lab", "--config", cfg]) == 0
    import csv
    with open(tmp_path / "bias" / "bias_lab.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0].keys()) == {"k", "repeat", "ln_p_hat", "elbo_hat",
                                   "exact_ln_p", "exact_elbo", "exact_chi2"}
    k1 = [r for r in rows if r["k"] == "1"]
    assert len(k1) == 40
    for r in k1:
        assert r["ln_p_hat"] == r["elbo_hat"]
    # exact columns are constant
    assert len({r["exact_ln_p"] for r in rows}) == 1


def test_bias_lab_requires_enumerable(tmp_path):
    cfg = _mixture_cfg(tmp_path, "nb", tmp_path / "d")
    assert main(["bias-lab", "--config", cfg]) == 2


def test_posterior_grid_identity_and_normalization(tmp_path):
    data_dir = tmp_path / "data"
    sim = _mixture_cfg(tmp_path, "sim4", data_dir)
    main(["simulate", "--config", sim, "--out", str(data_dir)])
    cfg = _write(tmp_path / "pg.ini", f"""
[model]
kind = mixture
pi_true = 0.4
mu_true = -6.0 -2.0 1.0 3.0

[train]
method = vis
k = 1
eval_k = 1
lr = 0.01
epochs = 1
batch_size = 1
seed = 0

[grid]
z_min = -16.0
z_max = 13.0
points = 581

[eval]
theta_true = {data_dir / "theta_true.ckpt"}
theta = {data_dir / "theta_true.ckpt"}
phi = {tmp_path / "phi.ckpt"}

[output]
dir = {tmp_path / "post"}
""")
    from vislearn.models import MixtureProposal
    phi = MixtureProposal.make_params(-2.0, 1.0, 2.0, 1.5)
    dataio.write_checkpoint(tmp_path / "phi.ckpt", phi)
    assert main(["posterior-grid", "--config", cfg]) == 0
    import csv
    with open(tmp_path / "post" / "posterior_grid.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 581
    for x in ("0", "1"):
        sub = [r for r in rows if r["x"] == x]
        z = np.array([float(r["z"]) for r in sub])
        assert np.all(np.diff(z) > 0)
        for col in ("true_posterior", "learned_posterior", "proposal"):
            dens = np.array([float(r[col]) for r in sub])
            assert np.trapezoid(dens, z) == pytest.approx(1.0, abs=1e-3)
        true = np.array([float(r["true_posterior"]) for r in sub])
        learned = np.array([float(r["learned_posterior"]) for r in sub])
        assert np.allclose(true, learned, atol=1e-10)


def test_posterior_grid_missing_checkpoint_exit_3(tmp_path):
    cfg = _write(tmp_path / "pg2.ini", f"""
[model]
kind = mixture
pi_true = 0.4
mu_true = 0 0 0 0

[eval]
theta_true = {tmp_path / "nope.ckpt"}
theta = {tmp_path / "nope.ckpt"}
phi = {tmp_path / "nope.ckpt"}

[output]
dir = {tmp_path / "post2"}
""")
    assert main(["posterior-grid", "--config", cfg]) == 3


def _vae_ckpts(tmp_path, zero_decoder=False):
    from vislearn.models import VaeModel, VaeProposal
    m, p = VaeModel(), VaeProposal()
    r = RngStream(0)
    theta = m.init_params(r.child(0))
    if zero_decoder:
        theta.values[:] = 0.0
    phi = p.init_params(r.child(1))
    dataio.write_checkpoint(tmp_path / "theta.ckpt", theta)
    dataio.write_checkpoint(tmp_path / "phi.ckpt", phi)


def test_manifold_grid(tmp_path):
    _vae_ckpts(tmp_path, zero_decoder=True)
    cfg = _write(tmp_path / "m.ini", f"""
[model]
kind = vae

[grid]
z_min = -3.0
z_max = 3.0
points = 20

[eval]
theta = {tmp_path / "theta.ckpt"}

[output]
dir = {tmp_path / "mani"}
""")
    assert main(["manifold", "--config", cfg]) == 0
    with open(tmp_path / "mani" / "manifold.csv") as fh:
        header = fh.readline().strip().split(",")
        rows = fh.read().splitlines()
    assert header[:2] == ["z1", "z2"]
    assert len(header) == 2 + 784
    assert len(rows) == 400
    vals = np.array([[float(c) for c in row.split(",")[2:]] for row in rows[:5]])
    assert np.all((vals > 0) & (vals < 1))
    # zero-weight decoder: every grid cell decodes identically
    first = rows[0].split(",")[2:]
    assert all(row.split(",")[2:] == first for row in rows)


def test_recon_rows(tmp_path):
    _vae_ckpts(tmp_path)
    imgs, labels = dataio.synthetic_digits(10, RngStream(2))
    dataio.write_mnist_idx(tmp_path / "ti.idx", tmp_path / "tl.idx", imgs, labels)
    cfg = _write(tmp_path / "r.ini", f"""
[model]
kind = vae

[data]
test_images = {tmp_path / "ti.idx"}
test_labels = {tmp_path / "tl.idx"}

[eval]
theta = {tmp_path / "theta.ckpt"}
phi = {tmp_path / "phi.ckpt"}
indices = 0 3 7

[output]
dir = {tmp_path / "rec"}
""")
    assert main(["recon", "--config", cfg]) == 0
    with open(tmp_path / "rec" / "recon.csv") as fh:
        lines = fh.read().splitlines()
    assert len(lines) == 1 + 6    # header + raw/recon per index
    kinds = [l.split(",")[1] for l in lines[1:]]
    assert kinds == ["raw", "recon"] * 3


def test_eval_command(tmp_path):
    data_dir = tmp_path / "data"
    sim = _mixture_cfg(tmp_path, "sim5", data_dir)
    main(["simulate", "--config", sim, "--out", str(data_dir)])
    run = _mixture_cfg(tmp_path, "run5", data_dir, epochs=1)
    main(["train", "--config", run])
    cfg = _write(tmp_path / "e.ini", f"""
[model]
kind = mixture
pi_true = 0.4
mu_true = -6.0 -2.0 1.0 3.0

[train]
method = vis
k = 20
eval_k = 50
lr = 0.01
epochs = 1
batch_size = 10
seed = 1

[data]
dir = {data_dir}

[eval]
theta = {tmp_path / "run5" / "theta.ckpt"}
phi = {tmp_path / "run5" / "phi.ckpt"}

[output]
dir = {tmp_path / "ev"}
""")
    assert main(["eval", "--config", cfg]) == 0
    with open(tmp_path / "ev" / "eval.csv") as fh:
        header = fh.readline().strip()
        row = fh.readline().strip().split(",")
    assert header == "method,seed,ll,cll,hll"
    assert row[0] == "vis"
    assert np.isfinite(float(row[2]))
