"""Monte Carlo gradient estimators.

Each estimator is a weighted combination of per-sample gradient rows
supplied through a GradBatch. Self-normalized weights are computed as a
softmax of log ratios, never by dividing raw exponentials. The same
weight functions are reused by the trainers, which fold the weighted
reduction into the model backward passes when per-sample gradient rows
would be too large to materialize (the VAE).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import softmax
from .errors import CapabilityError, NumericError
from .estimators import SampleBatch
from .params import ParamVector


@dataclass(frozen=True)
class GradBatch:
    """SampleBatch plus per-sample gradient rows.

    dlogjoint_dtheta[k] is the theta-gradient of ln p(x, z_k; theta),
    dlogq_dphi[k] the phi-gradient of ln q(z_k | x; phi) at fixed z_k.
    For reparameterized proposals, the *_path rows carry total
    derivatives through z = g(eps; phi) at fixed noise:
      dlogjoint_dphi_path[k]  = d/dphi ln p(x, g(eps_k; phi); theta)
      dlogq_dphi_total[k]     = d/dphi ln q(g(eps_k; phi) | x; phi)
    """
    batch: SampleBatch
    theta_layout: tuple = ()
    phi_layout: tuple = ()
    dlogjoint_dtheta: np.ndarray | None = None
    dlogq_dphi: np.ndarray | None = None
    dlogjoint_dphi_path: np.ndarray | None = None
    dlogq_dphi_total: np.ndarray | None = None

    def _rows(self, name) -> np.ndarray:
        rows = getattr(self, name)
        if rows is None:
            raise ValueError(f"GradBatch has no {name} rows")
        if rows.shape[0] != self.batch.k:
            raise ValueError(
                f"{name} has {rows.shape[0]} rows for K={self.batch.k}"
            )
        return rows

    def _theta_vec(self, values) -> ParamVector:
        return ParamVector(np.asarray(values, dtype=np.float64), self.theta_layout)

    def _phi_vec(self, values) -> ParamVector:
        return ParamVector(np.asarray(values, dtype=np.float64), self.phi_layout)


def importance_weights(batch: SampleBatch) -> np.ndarray:
    """Self-normalized weights softmax(log ratios). Errors if all ratios
    are -inf (every sample hit a zero-density joint)."""
    d = batch.log_ratios()
    if np.all(d == -np.inf):
        raise NumericError("all importance weights are zero (log ratios -inf)")
    return softmax(d)


def chi2_weights(batch: SampleBatch) -> np.ndarray:
    """softmax(2 * log ratios): the normalized exp-space weights of the
    log-V objective."""
    d = batch.log_ratios()
    if np.all(d == -np.inf):
        raise NumericError("all chi^2 weights are zero (log ratios -inf)")
    return softmax(2.0 * d)


def grad_theta_ln_p_hat(gb: GradBatch) -> ParamVector:
    """Theta-gradient of ln_p_hat: importance-weighted sum of per-sample
    joint gradients. For K=1 this is exactly the single sample's gradient."""
    rows = gb._rows("dlogjoint_dtheta")
    w = importance_weights(gb.batch)
    return gb._theta_vec(w @ rows)


def grad_theta_p_hat(gb: GradBatch) -> ParamVector:
    """Theta-gradient of the exp-space estimate p_hat (unnormalized):
    (1/K) sum exp(log ratio_k) * dlogjoint_dtheta[k]. Its expectation is
    exactly the gradient of the true marginal."""
    rows = gb._rows("dlogjoint_dtheta")
    d = gb.batch.log_ratios()
    w = np.where(d == -np.inf, 0.0, np.exp(d)) / gb.batch.k
    return gb._theta_vec(w @ rows)


def grad_theta_elbo_hat(gb: GradBatch) -> ParamVector:
    """Theta-gradient of the empirical ELBO: plain average of per-sample
    joint gradients."""
    rows = gb._rows("dlogjoint_dtheta")
    return gb._theta_vec(rows.mean(axis=0))


def grad_phi_elbo_score(gb: GradBatch) -> ParamVector:
    """Score-function phi-gradient of the ELBO:
    (1/K) sum (log ratio_k) * dlogq_dphi[k]."""
    rows = gb._rows("dlogq_dphi")
    d = gb.batch.log_ratios()
    return gb._phi_vec((d / gb.batch.k) @ rows)


def grad_phi_elbo_pathwise(gb: GradBatch) -> ParamVector:
    """Pathwise phi-gradient of the ELBO at fixed noise:
    (1/K) sum d/dphi [ln p(x, g(eps_k)) - ln q(g(eps_k) | x)]."""
    if gb.dlogjoint_dphi_path is None or gb.dlogq_dphi_total is None:
        raise CapabilityError("pathwise gradient requires reparameterized rows")
    lhs = gb._rows("dlogjoint_dphi_path")
    rhs = gb._rows("dlogq_dphi_total")
    return gb._phi_vec((lhs - rhs).mean(axis=0))


def grad_phi_ln_V_score(gb: GradBatch) -> ParamVector:
    """Score-function phi-gradient of ln V_hat (log_joint held constant):
    -sum softmax(2 * log ratio)_k * dlogq_dphi[k]. The softmax absorbs
    both the exp terms and the 1/V_hat normalization."""
    rows = gb._rows("dlogq_dphi")
    s = chi2_weights(gb.batch)
    return gb._phi_vec(-(s @ rows))


def grad_phi_ln_V_pathwise(gb: GradBatch) -> ParamVector:
    """Pathwise phi-gradient of ln V_hat at fixed noise, all phi
    dependence (through z and through q's density) differentiated:
    sum softmax(2 d)_k * 2 * d/dphi [ln p(..) - ln q(..)]."""
    if gb.dlogjoint_dphi_path is None or gb.dlogq_dphi_total is None:
        raise CapabilityError("pathwise gradient requires reparameterized rows")
    lhs = gb._rows("dlogjoint_dphi_path")
    rhs = gb._rows("dlogq_dphi_total")
    s = chi2_weights(gb.batch)
    return gb._phi_vec((2.0 * s) @ (lhs - rhs))


def build_grad_batch(model, proposal, x, theta: ParamVector, phi: ParamVector,
                     zs=None, eps=None) -> GradBatch:
    """Materialize per-sample gradient rows for one observation.

    Pass eps (fixed noise) for reparameterizable proposals to also fill
    the path-derivative rows. Row materialization is O(K * params), so
    this is for small models and tests; trainers fold the weighted
    reductions into the model backward passes instead.
    """
    if eps is not None:
        zs = proposal.transform(eps, x, phi)
    if zs is None:
        raise ValueError("provide zs or eps")
    lj = model.log_joint_batch(x, zs, theta)
    lq = proposal.log_density_batch(zs, x, phi)
    batch = SampleBatch(lj, lq, zs)
    k = batch.k
    dth = np.stack([model.grad_theta_log_joint(x, z, theta).values for z in zs])
    dph = np.stack([proposal.grad_phi_log_density(z, x, phi).values for z in zs])
    extra = {}
    if eps is not None and proposal.reparameterizable:
        gpz = model.grad_z_log_joint_batch(x, zs, theta)
        gqz = proposal.grad_z_log_density_batch(zs, x, phi)
        rows_j = np.zeros((k, phi.size))
        rows_q = np.zeros((k, phi.size))
        for i in range(k):
            pick = np.zeros(k)
            pick[i] = 1.0
            rows_j[i] = proposal.weighted_transform_vjp(x, eps, phi, gpz, pick).values
            rows_q[i] = (proposal.weighted_transform_vjp(x, eps, phi, gqz, pick).values
                         + dph[i])
        extra = dict(dlogjoint_dphi_path=rows_j, dlogq_dphi_total=rows_q)
    return GradBatch(batch, theta.layout, phi.layout,
                     dlogjoint_dtheta=dth, dlogq_dphi=dph, **extra)


def grad_phi_ln_p_hat_pathwise(gb: GradBatch) -> ParamVector:
    """Pathwise phi-gradient of ln_p_hat at fixed noise (the multi-sample
    bound's phi term): sum softmax(d)_k * d/dphi [ln p(..) - ln q(..)]."""
    if gb.dlogjoint_dphi_path is None or gb.dlogq_dphi_total is None:
        raise CapabilityError("pathwise gradient requires reparameterized rows")
    lhs = gb._rows("dlogjoint_dphi_path")
    rhs = gb._rows("dlogq_dphi_total")
    w = importance_weights(gb.batch)
    return gb._phi_vec(w @ (lhs - rhs))
