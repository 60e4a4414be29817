"""End-to-end checks: generate the experiment CSVs through the primary
package's CLI and scripts (its external interface), then render every
figure kind. The figure scripts themselves never import the primary."""
import csv
import os
import subprocess
import sys

import pytest

FIG_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
REPO = os.path.dirname(FIG_DIR)
SCRIPTS = os.path.join(REPO, "scripts")


def run(cmd, **kw):
    proc = subprocess.run([sys.executable] + cmd, capture_output=True,
                          text=True, **kw)
    assert proc.returncode == 0, f"{cmd}\n{proc.stdout}\n{proc.stderr}"
    return proc


def cli(*args):
    return run(["-m", "vislearn", *args])


def render(script, input_csv, output):
    run([os.path.join(FIG_DIR, script), str(input_csv), "-o", str(output)],
        cwd=FIG_DIR)
    assert os.path.exists(output) and os.path.getsize(output) > 0


def write_cfg(path, text):
    with open(path, "w") as fh:
        fh.write(text)
    return str(path)


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    """Desk-format CSVs for every figure kind, produced once."""
    ws = tmp_path_factory.mktemp("fig-data")

    # --- bias lab ---
    bias_cfg = write_cfg(ws / "bias.ini", f"""
[model]
kind = enumerable

[train]
method = vis
k = 1
eval_k = 1
lr = 0.01
epochs = 1
batch_size = 1
seed = 0

[bias]
k_list = 1 2 5 10 50
repeats = 60
x = 1
proposal_blend = 0.7

[output]
dir = {ws / "bias"}
""")
    cli("bias-lab", "--config", bias_cfg)

    # --- mixture: simulate, two short runs, posterior grid, aggregates ---
    mix_data = ws / "mix-data"
    base = f"""
[model]
kind = mixture
pi_true = 0.4
mu_true = -6.0 -2.0 1.0 3.0

[train]
method = METHOD
k = 25
eval_k = 50
lr = 0.01
epochs = 3
batch_size = 10
seed = SEED

[data]
dir = {mix_data}
train_size = 80
test_size = 60

[output]
dir = OUT
"""
    sim_cfg = write_cfg(ws / "mix-sim.ini",
                        base.replace("METHOD", "vis").replace("SEED", "0")
                        .replace("OUT", str(mix_data)))
    cli("simulate", "--config", sim_cfg)
    run_dirs = []
    for method, seed in (("vis", 0), ("vi", 0), ("vis", 1), ("vi", 1)):
        out = ws / f"mix-{method}-{seed}"
        cfg = write_cfg(ws / f"mix-{method}-{seed}.ini",
                        base.replace("METHOD", method).replace("SEED", str(seed))
                        .replace("OUT", str(out)))
        cli("train", "--config", cfg)
        run_dirs.append(str(out))
    run([os.path.join(SCRIPTS, "collect_results.py"), *run_dirs,
         "-o", str(ws / "combined")])

    post_cfg = write_cfg(ws / "post.ini", f"""
[model]
kind = mixture
pi_true = 0.4
mu_true = -6.0 -2.0 1.0 3.0

[grid]
z_min = -12.0
z_max = 9.0
points = 211

[eval]
theta_true = {mix_data / "theta_true.ckpt"}
theta = {run_dirs[0]}/theta.ckpt
phi = {run_dirs[0]}/phi.ckpt

[output]
dir = {ws / "post"}
""")
    cli("posterior-grid", "--config", post_cfg)

    # --- poglm: simulate only (for the weight heatmap) ---
    poglm_cfg = write_cfg(ws / "poglm.ini", f"""
[model]
kind = poglm
visible = 3
hidden = 2

[train]
method = vis
k = 5
eval_k = 5
lr = 0.01
epochs = 1
batch_size = 2
seed = 0

[data]
dir = {ws / "poglm-data"}
train_trains = 2
test_trains = 1
train_len = 40

[output]
dir = {ws / "poglm-data"}
""")
    cli("simulate", "--config", poglm_cfg)
    run([os.path.join(SCRIPTS, "export_weights.py"),
         str(ws / "poglm-data" / "theta_true.ckpt"), "--visible", "3",
         "-o", str(ws / "weights.csv")])

    # --- vae: synthetic digit files, one tiny run, manifold + recon ---
    run([os.path.join(SCRIPTS, "make_fake_mnist.py"), "--out", str(ws / "mnist"),
         "--train", "96", "--test", "16"])
    vae_cfg = write_cfg(ws / "vae.ini", f"""
[model]
kind = vae

[train]
method = vis
k = 3
eval_k = 3
lr = 0.005
epochs = 1
batch_size = 32
seed = 0

[data]
images = {ws / "mnist" / "train-images-idx3-ubyte"}
labels = {ws / "mnist" / "train-labels-idx1-ubyte"}
test_images = {ws / "mnist" / "t10k-images-idx3-ubyte"}
test_labels = {ws / "mnist" / "t10k-labels-idx1-ubyte"}
train_subset = 96
test_subset = 16

[output]
dir = {ws / "vae-run"}
""")
    cli("train", "--config", vae_cfg)
    mani_cfg = write_cfg(ws / "mani.ini", f"""
[model]
kind = vae

[grid]
z_min = -3.0
z_max = 3.0
points = 8

[eval]
theta = {ws / "vae-run" / "theta.ckpt"}
phi = {ws / "vae-run" / "phi.ckpt"}

[data]
test_images = {ws / "mnist" / "t10k-images-idx3-ubyte"}
test_labels = {ws / "mnist" / "t10k-labels-idx1-ubyte"}

[output]
dir = {ws / "vae-run"}
""")
    cli("manifold", "--config", mani_cfg)
    cli("recon", "--config", mani_cfg)
    return ws


def test_bias_boxes_renders(workspace, tmp_path):
    render("plot_bias_boxes.py", workspace / "bias" / "bias_lab.csv",
           tmp_path / "bias.png")


def test_bias_lab_k1_boxes_identical_data(workspace):
    with open(workspace / "bias" / "bias_lab.csv", newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["k"] == "1"]
    assert rows
    assert all(r["ln_p_hat"] == r["elbo_hat"] for r in rows)


def test_posteriors_renders(workspace, tmp_path):
    render("plot_posteriors.py", workspace / "post" / "posterior_grid.csv",
           tmp_path / "post.png")


def test_curves_renders_combined_and_single(workspace, tmp_path):
    render("plot_curves.py", workspace / "combined" / "curves.csv",
           tmp_path / "curves.png")
    render("plot_curves.py", workspace / "mix-vis-0" / "trainlog.csv",
           tmp_path / "curves_single.png")


def test_curves_has_all_epochs_per_method(workspace):
    with open(workspace / "combined" / "curves.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    for method in ("vis", "vi"):
        for seed in ("0", "1"):
            epochs = [int(r["epoch"]) for r in rows
                      if r["method"] == method and r["seed"] == seed]
            assert epochs == [1, 2, 3]


def test_bars_renders(workspace, tmp_path):
    render("plot_bars.py", workspace / "combined" / "summary.csv",
           tmp_path / "bars.png")


def test_heatmap_renders(workspace, tmp_path):
    render("plot_heatmap.py", workspace / "weights.csv", tmp_path / "heat.png")


def test_image_grid_renders_manifold_and_recon(workspace, tmp_path):
    render("plot_image_grid.py", workspace / "vae-run" / "manifold.csv",
           tmp_path / "manifold.png")
    render("plot_image_grid.py", workspace / "vae-run" / "recon.csv",
           tmp_path / "recon.png")


def test_missing_column_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    proc = subprocess.run(
        [sys.executable, os.path.join(FIG_DIR, "plot_curves.py"), str(bad),
         "-o", str(tmp_path / "x.png")],
        capture_output=True, text=True, cwd=FIG_DIR)
    assert proc.returncode != 0
    assert "epoch" in proc.stderr or "epoch" in proc.stdout


def test_heatmap_rejects_missing_sidecar(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("n,b,w0\n0,0.|,0.2\n")
    proc = subprocess.run(
        [sys.executable, os.path.join(FIG_DIR, "plot_heatmap.py"), str(bad),
         "-o", str(tmp_path / "x.png")],
        capture_output=True, text=True, cwd=FIG_DIR)
    assert proc.returncode != 0
    assert "V,H" in proc.stderr + proc.stdout
