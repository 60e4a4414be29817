"""Scalar Monte Carlo estimators of the marginal log-likelihood family.

All of them are pure functions of a SampleBatch, so one drawn batch can
feed several estimators (common random numbers make the K=1 identities
exact and method comparisons noise-free).

Conventions: log_joint[k] = ln p(x, z_k; theta), log_q[k] = ln q(z_k | x; phi),
and diff = log_joint - log_q is the log importance ratio.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import logsumexp


@dataclass(frozen=True)
class SampleBatch:
    """K latent draws with their log-joint and log-proposal values.

    Entries may be -inf (zero density) but never NaN or +inf.
    """
    log_joint: np.ndarray
    log_q: np.ndarray
    latents: object = None

    def __post_init__(self):
        lj = np.asarray(self.log_joint, dtype=np.float64)
        lq = np.asarray(self.log_q, dtype=np.float64)
        object.__setattr__(self, "log_joint", lj)
        object.__setattr__(self, "log_q", lq)
        if lj.ndim != 1 or lq.ndim != 1 or lj.size != lq.size or lj.size < 1:
            raise ValueError(
                f"log_joint and log_q must be equal-length vectors with K >= 1, "
                f"got {lj.shape} and {lq.shape}"
            )
        for name, a in (("log_joint", lj), ("log_q", lq)):
            if np.isnan(a).any() or (a == np.inf).any():
                raise ValueError(f"{name} must be finite or -inf, no NaN/+inf")

    @property
    def k(self) -> int:
        return self.log_joint.size

    def log_ratios(self) -> np.ndarray:
        # -inf - -inf would be NaN; a -inf joint dominates (the weight is 0)
        lj, lq = self.log_joint, self.log_q
        with np.errstate(invalid="ignore"):
            d = lj - lq
        return np.where(lj == -np.inf, -np.inf, d)


def elbo_hat(batch: SampleBatch) -> float:
    """Empirical evidence lower bound: mean of log importance ratios."""
    return float(np.mean(batch.log_ratios()))


def ln_p_hat(batch: SampleBatch) -> float:
    """Importance-sampling estimate of the log-marginal, in log space:
    logsumexp(log ratios) - ln K. Equals elbo_hat exactly when K = 1.
    """
    return float(logsumexp(batch.log_ratios()) - np.log(batch.k))


def ln_V_hat(batch: SampleBatch) -> float:
    """Log of the second-moment quantity driving the forward chi^2
    objective: logsumexp(2 * log ratios) - ln K. Always >= 2 * ln_p_hat.
    """
    return float(logsumexp(2.0 * batch.log_ratios()) - np.log(batch.k))


def cubo_hat(batch: SampleBatch) -> float:
    """chi^2-based upper-bound estimate: half of ln_V_hat."""
    return 0.5 * ln_V_hat(batch)


def predicted_bias(chi2: float, k: int) -> float:
    """Second-order (Delta-method) bias of ln_p_hat: -chi2 / (2K)."""
    if chi2 < 0:
        raise ValueError(f"chi2 must be >= 0, got {chi2}")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    return -chi2 / (2.0 * k)


def predicted_variance(p_x: float, chi2: float, k: int) -> float:
    """Sampling variance of the exp-space estimator: p(x)^2 * chi2 / K."""
    if p_x <= 0:
        raise ValueError(f"p_x must be positive, got {p_x}")
    if chi2 < 0:
        raise ValueError(f"chi2 must be >= 0, got {chi2}")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    return p_x * p_x * chi2 / k
