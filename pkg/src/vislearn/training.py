"""The five learning procedures and the shared evaluation loop.

Methods:
  vis   - theta ascends the IS log-marginal estimate; phi descends the
          log-V (forward chi^2) objective. One sample draw per step
          serves both updates; the phi step re-scores log-joints under
          the freshly updated theta.
  vi    - theta ascends the empirical ELBO; phi ascends the ELBO too
          (pathwise when the proposal is reparameterizable, otherwise
          score-function).
  chivi - theta as VI; phi alternates per step between descending the
          chi^2 upper bound (even global steps) and ascending the ELBO
          (odd steps).
  vbis  - phi as VI (reverse KL); theta ascends the IS estimate.
  iwae  - theta and phi both follow the pathwise gradient of the
          multi-sample bound; requires a reparameterizable proposal.

All trainers are deterministic functions of (data, cfg.seed): random
streams are derived by purpose and position, never from call order.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .contracts import LatentModel, Proposal
from .core import AdamState, adam_step, clip_global_norm
from .errors import ConfigError, NumericError
from .estimators import SampleBatch, elbo_hat, ln_p_hat
from .gradients import chi2_weights, importance_weights
from .params import ParamVector
from .rng import RngStream

METHODS = ("vis", "vi", "chivi", "vbis", "iwae")

# stream purposes under the run's root seed
_S_THETA_INIT, _S_PHI_INIT, _S_SHUFFLE, _S_DRAW, _S_EVAL = range(5)


@dataclass
class TrainConfig:
    method: str
    k: int
    eval_k: int
    lr: float
    epochs: int
    batch_size: int
    seed: int
    grad_clip: float = 100.0
    # chi^2 phi-gradient route for reparameterizable proposals:
    # "pathwise" differentiates through z = g(eps; phi); "score" uses the
    # score-function form, whose scale dynamics self-correct when the
    # importance weights degenerate (the amortized autoencoder needs it)
    chi_grad: str = "pathwise"

    def validate(self, proposal: Proposal | None = None):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; pick from {METHODS}")
        if self.chi_grad not in ("pathwise", "score"):
            raise ConfigError(f"chi_grad must be 'pathwise' or 'score', "
                              f"got {self.chi_grad!r}")
        if self.k < 1 or self.eval_k < 1:
            raise ConfigError("k and eval_k must be >= 1")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if (self.method == "iwae" and proposal is not None
                and not proposal.reparameterizable):
            raise ConfigError(
                "method 'iwae' needs a reparameterizable proposal; "
                f"{type(proposal).__name__} is not")


@dataclass
class ExperimentData:
    """Datapoint lists; latents (when simulation recorded them) align
    with test and unlock the CLL/HLL metrics."""
    train: list
    test: list
    test_latents: list | None = None


@dataclass
class TrainLog:
    rows: list = field(default_factory=list)

    COLUMNS = ("epoch", "objective", "ll", "cll", "hll", "seconds")

    def append(self, **row):
        self.rows.append({c: row.get(c) for c in self.COLUMNS})

    def column(self, name):
        return [r[name] for r in self.rows]

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(self.COLUMNS) + "\n")
            for r in self.rows:
                cells = []
                for c in self.COLUMNS:
                    v = r[c]
                    if v is None:
                        cells.append("")
                    elif c == "epoch":
                        cells.append(str(int(v)))
                    else:
                        cells.append(repr(float(v)))
                fh.write(",".join(cells) + "\n")

    @classmethod
    def read_csv(cls, path):
        log = cls()
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != cls.COLUMNS:
                raise ValueError(f"unexpected train-log header {header}")
            for line in fh:
                cells = line.strip().split(",")
                row = {}
                for c, cell in zip(cls.COLUMNS, cells):
                    if cell == "":
                        row[c] = None
                    elif c == "epoch":
                        row[c] = int(cell)
                    else:
                        row[c] = float(cell)
                log.rows.append(row)
        return log


def initial_params(model: LatentModel, proposal: Proposal, cfg: TrainConfig):
    """The exact parameter initialization a trainer with this cfg uses."""
    root = RngStream(cfg.seed)
    theta = model.init_params(root.child(_S_THETA_INIT))
    phi = proposal.init_params(root.child(_S_PHI_INIT))
    return theta, phi


def _draw(proposal, x, phi, k, rng):
    """Sample latents, through the reparameterization when available so
    every method consumes the stream identically."""
    if proposal.reparameterizable:
        eps = proposal.sample_noise(x, phi, k, rng)
        return proposal.transform(eps, x, phi), eps
    return proposal.sample(x, phi, k, rng), None


def _pathwise_phi_grad(model, proposal, x, zs, eps, theta, phi, weights):
    """sum_k weights_k * d/dphi [ln p(x, g(eps_k)) - ln q(g(eps_k)|x)]."""
    upstream = (model.grad_z_log_joint_batch(x, zs, theta)
                - proposal.grad_z_log_density_batch(zs, x, phi))
    vjp = proposal.weighted_transform_vjp(x, eps, phi, upstream, weights)
    return vjp.values - proposal.weighted_grad_phi(x, zs, weights, phi).values


def _phi_grad_ln_V(model, proposal, x, zs, eps, theta, phi, batch,
                   pathwise=True):
    """Gradient of ln V_hat w.r.t. phi (a descent direction for chi^2)."""
    s = chi2_weights(batch)
    if pathwise and proposal.reparameterizable:
        return _pathwise_phi_grad(model, proposal, x, zs, eps, theta, phi, 2.0 * s)
    return -proposal.weighted_grad_phi(x, zs, s, phi).values


def _phi_grad_elbo(model, proposal, x, zs, eps, theta, phi, batch):
    """Gradient of the empirical ELBO w.r.t. phi (an ascent direction)."""
    k = batch.k
    if proposal.reparameterizable:
        return _pathwise_phi_grad(model, proposal, x, zs, eps, theta, phi,
                                  np.full(k, 1.0 / k))
    return proposal.weighted_grad_phi(x, zs, batch.log_ratios() / k, phi).values


def train(model: LatentModel, proposal: Proposal, data: ExperimentData,
          cfg: TrainConfig, chivi_cubo: bool = True, init=None,
          epoch_hook=None):
    """Run cfg.method and return (theta, phi, TrainLog). TrainLog holds
    one row per epoch; wall seconds is the only non-deterministic column.
    chivi_cubo=False degenerates CHIVI's schedule to pure ELBO steps
    (then it reproduces VI exactly); init=(theta0, phi0) overrides the
    seeded initialization; epoch_hook(epoch, theta, phi) runs after each
    epoch's evaluation (the CLI uses it for checkpoint cadence)."""
    cfg.validate(proposal)
    method = cfg.method
    root = RngStream(cfg.seed)
    if init is None:
        theta, phi = initial_params(model, proposal, cfg)
    else:
        theta, phi = init[0].copy(), init[1].copy()
    adam_theta = AdamState.for_params(theta)
    adam_phi = AdamState.for_params(phi)
    log = TrainLog()
    n = len(data.train)
    global_step = 0
    for epoch in range(1, cfg.epochs + 1):
        tic = time.perf_counter()
        order = root.child(_S_SHUFFLE, epoch).permutation(n)
        objective_sum = 0.0
        n_steps = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            points = []
            g_theta = np.zeros(theta.size)
            obj = 0.0
            step_rng = root.child(_S_DRAW, epoch, global_step)
            for j, i in enumerate(idx):
                x = data.train[int(i)]
                zs, eps = _draw(proposal, x, phi, cfg.k, step_rng)
                lq = proposal.log_density_batch(zs, x, phi)
                lj = model.log_joint_batch(x, zs, theta)
                try:
                    batch = SampleBatch(lj, lq, zs)
                except ValueError as exc:
                    raise NumericError(
                        f"step {global_step}: invalid log densities "
                        f"({exc})") from exc
                if method in ("vis", "vbis", "iwae"):
                    w = importance_weights(batch)
                    obj += ln_p_hat(batch)
                else:
                    w = np.full(batch.k, 1.0 / batch.k)
                    obj += elbo_hat(batch)
                g_theta += model.weighted_grad_theta(x, zs, w, theta).values
                points.append((x, zs, eps, batch))
            b = len(idx)
            obj /= b
            if not np.isfinite(obj):
                raise NumericError(
                    f"step {global_step}: non-finite training objective ({obj})")
            g_theta_vec = clip_global_norm(
                ParamVector(g_theta / b, theta.layout), cfg.grad_clip)
            new_theta = adam_step(theta, g_theta_vec.with_values(-g_theta_vec.values),
                                  adam_theta, cfg.lr)

            cubo_turn = chivi_cubo and (global_step % 2 == 0)
            chi_pathwise = cfg.chi_grad == "pathwise"
            g_phi = np.zeros(phi.size)
            for (x, zs, eps, batch) in points:
                if method == "vis":
                    lj2 = model.log_joint_batch(x, zs, new_theta)
                    batch2 = SampleBatch(lj2, batch.log_q, zs)
                    g_phi += _phi_grad_ln_V(model, proposal, x, zs, eps,
                                            new_theta, phi, batch2,
                                            pathwise=chi_pathwise)
                elif method == "chivi" and cubo_turn:
                    g_phi += 0.5 * _phi_grad_ln_V(model, proposal, x, zs, eps,
                                                  theta, phi, batch,
                                                  pathwise=chi_pathwise)
                elif method == "iwae":
                    g_phi += _pathwise_phi_grad(model, proposal, x, zs, eps,
                                                theta, phi,
                                                importance_weights(batch))
                else:  # vi, vbis, chivi's ELBO turn
                    g_phi += _phi_grad_elbo(model, proposal, x, zs, eps,
                                            theta, phi, batch)
            g_phi_vec = clip_global_norm(ParamVector(g_phi / b, phi.layout),
                                         cfg.grad_clip)
            if method == "vis" or (method == "chivi" and cubo_turn):
                phi = adam_step(phi, g_phi_vec, adam_phi, cfg.lr)      # descend
            else:
                phi = adam_step(phi, g_phi_vec.with_values(-g_phi_vec.values),
                                adam_phi, cfg.lr)                      # ascend
            theta = new_theta
            objective_sum += obj
            n_steps += 1
            global_step += 1
        metrics = evaluate(model, proposal, theta, phi, data.test, cfg.eval_k,
                           root.child(_S_EVAL, epoch), data.test_latents)
        for name, v in metrics.items():
            if v is not None and not np.isfinite(v):
                raise NumericError(f"epoch {epoch}: non-finite test {name} ({v})")
        log.append(epoch=epoch, objective=objective_sum / max(n_steps, 1),
                   ll=metrics["ll"], cll=metrics["cll"], hll=metrics["hll"],
                   seconds=time.perf_counter() - tic)
        if epoch_hook is not None:
            epoch_hook(epoch, theta, phi)
    return theta, phi, log


def train_vis(model, proposal, data, cfg):
    return train(model, proposal, data, _with_method(cfg, "vis"))


def train_vi(model, proposal, data, cfg):
    return train(model, proposal, data, _with_method(cfg, "vi"))


def train_chivi(model, proposal, data, cfg, cubo=True):
    return train(model, proposal, data, _with_method(cfg, "chivi"), chivi_cubo=cubo)


def train_vbis(model, proposal, data, cfg):
    return train(model, proposal, data, _with_method(cfg, "vbis"))


def train_iwae(model, proposal, data, cfg):
    return train(model, proposal, data, _with_method(cfg, "iwae"))


def _with_method(cfg: TrainConfig, method: str) -> TrainConfig:
    return cfg if cfg.method == method else replace(cfg, method=method)


def evaluate(model: LatentModel, proposal: Proposal, theta: ParamVector,
             phi: ParamVector, test_data, eval_k: int, rng: RngStream,
             test_latents=None) -> dict:
    """Test metrics: ll is the mean IS estimate of the log-marginal with
    eval_k proposal draws per point; cll and hll need the true latents
    and stay None without them."""
    if eval_k < 1:
        raise ValueError("eval_k must be >= 1")
    if hasattr(model, "eval_ll_vector"):
        lls = model.eval_ll_vector(test_data, theta, proposal, phi, eval_k, rng)
    else:
        lls = np.zeros(len(test_data))
        for i, x in enumerate(test_data):
            zs, _ = _draw(proposal, x, phi, eval_k, rng.child(i))
            lq = proposal.log_density_batch(zs, x, phi)
            lj = model.log_joint_batch(x, zs, theta)
            lls[i] = ln_p_hat(SampleBatch(lj, lq, zs))
    out = {"ll": float(lls.mean()), "cll": None, "hll": None}
    if test_latents is not None:
        cll = [model.log_joint(x, z, theta)
               for x, z in zip(test_data, test_latents)]
        hll = [proposal.log_density(z, x, phi)
               for x, z in zip(test_data, test_latents)]
        out["cll"] = float(np.mean(cll))
        out["hll"] = float(np.mean(hll))
    return out
