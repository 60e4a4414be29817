"""Partially observable Poisson GLM over multi-neuron spike trains.

Spike counts y[t, n] are Poisson with rate
softplus(b_n + sum_{n'} W[n, n'] * (history of n' filtered by psi)),
where psi is a fixed positive kernel over the last L bins and history
before the first bin is all-zero. The first V neurons are visible, the
remaining H hidden; the hidden columns are the latent variable.

The proposal is a GLM of the same form over the hidden neurons only,
with its own (b_q, W_q); it samples hidden counts sequentially given
the full (visible + already-sampled hidden) history. Poisson latents
are discrete, so the proposal is not reparameterizable and phi-updates
go through score-function estimators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ..contracts import LatentModel, Proposal
from ..core import sigmoid, softplus
from ..params import ParamVector, pack
from ..rng import RngStream

COUNT_CAP = 10 ** 6  # sanity guard against runaway rates during sampling


@dataclass(frozen=True)
class Basis:
    """Positive history kernel; psi[l-1] weights the count l bins back."""
    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.float64)
        object.__setattr__(self, "psi", psi)
        if psi.ndim != 1 or psi.size < 1 or np.any(psi <= 0):
            raise ValueError("basis must be a strictly positive vector")

    @property
    def length(self) -> int:
        return self.psi.size

    @classmethod
    def exponential(cls, length: int = 5, tau: float = 2.0) -> "Basis":
        """Normalized decaying kernel exp(-(l-1)/tau), l = 1..length."""
        raw = np.exp(-np.arange(length) / tau)
        return cls(raw / raw.sum())


@dataclass(frozen=True)
class SpikeTrain:
    """T x N non-negative integer counts; first `visible` columns observed."""
    y: np.ndarray
    visible: int

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.ndim != 2:
            raise ValueError("spike train must be a T x N matrix")
        if np.any(y < 0) or not np.issubdtype(y.dtype, np.integer):
            raise ValueError("spike counts must be non-negative integers")
        if not 0 <= self.visible <= y.shape[1]:
            raise ValueError("visible count out of range")
        object.__setattr__(self, "y", y.astype(np.int64))

    @property
    def t(self) -> int:
        return self.y.shape[0]

    @property
    def n(self) -> int:
        return self.y.shape[1]

    @property
    def hidden(self) -> int:
        return self.n - self.visible

    @property
    def x(self) -> np.ndarray:
        return self.y[:, :self.visible]

    @property
    def z(self) -> np.ndarray:
        return self.y[:, self.visible:]


def filter_history(y, psi: np.ndarray) -> np.ndarray:
    """Filtered history s[t, n] = sum_l y[t-l, n] * psi[l-1], zero-padded
    before the first bin. y may carry leading batch axes; time is axis -2."""
    y = np.asarray(y, dtype=np.float64)
    s = np.zeros_like(y)
    for l in range(1, psi.size + 1):
        s[..., l:, :] += psi[l - 1] * y[..., :-l, :]
    return s


def _log_rate(a):
    """ln softplus(a), stable when a is very negative (softplus ~ e^a)."""
    a = np.asarray(a, dtype=np.float64)
    low = a < -30.0
    return np.where(low, a, np.log(softplus(np.where(low, 0.0, a))))


def _poisson_terms(y, a):
    """Poisson log-pmf with rate softplus(a): y*ln f - f - ln y!."""
    y = np.asarray(y, dtype=np.float64)
    return y * _log_rate(a) - softplus(a) - gammaln(y + 1.0)


def _rate_residual(y, a):
    """d/da of the Poisson log-pmf through f = softplus(a):
    (y/f - 1) * sigmoid(a), with the y/f * sigmoid(a) ratio computed
    stably (it tends to y as a -> -inf)."""
    y = np.asarray(y, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    sig = sigmoid(a)
    low = a < -30.0
    ratio = np.where(low, 1.0, sig / softplus(np.where(low, 0.0, a)))
    return y * ratio - sig


class PoglmModel(LatentModel):
    """Joint density over a full spike train; latents are the hidden
    (T, H) count blocks."""

    def __init__(self, visible: int, hidden: int, basis: Basis | None = None,
                 sim_len: int = 100):
        self.visible = int(visible)
        self.hidden = int(hidden)
        self.n = self.visible + self.hidden
        self.basis = basis if basis is not None else Basis.exponential()
        self.sim_len = int(sim_len)

    def init_params(self, rng: RngStream) -> ParamVector:
        # zeros, matching the reference training setup
        return pack([("b", np.zeros(self.n)), ("W", np.zeros((self.n, self.n)))])

    def _check_counts(self, arr):
        arr = np.asarray(arr)
        if np.any(arr < 0):
            raise ValueError("spike counts must be non-negative")
        return arr.astype(np.float64)

    def _preactivation(self, y, theta: ParamVector):
        s = filter_history(y, self.basis.psi)
        return s @ theta.segment("W").T + theta.segment("b"), s

    def firing_rate(self, history: np.ndarray, n: int, theta: ParamVector) -> float:
        """Rate of neuron n in the bin right after `history` (rows ordered
        oldest to newest; may be shorter than the kernel, including empty)."""
        h = np.zeros((self.basis.length, self.n))
        hist = np.asarray(history, dtype=np.float64).reshape(-1, self.n)
        take = min(hist.shape[0], self.basis.length)
        if take:
            h[-take:] = hist[hist.shape[0] - take:]
        filtered = self.basis.psi[::-1] @ h   # psi[0] weights the newest row
        a = float(theta.segment("b")[n] + theta.segment("W")[n] @ filtered)
        return softplus(a)

    def log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        x = self._check_counts(x)
        zs = self._check_counts(zs)
        if zs.ndim == 2:
            zs = zs[None]
        k = zs.shape[0]
        y = np.concatenate([np.broadcast_to(x, (k,) + x.shape), zs], axis=2)
        a, _ = self._preactivation(y, theta)
        return _poisson_terms(y, a).sum(axis=(1, 2))

    def log_joint(self, x, z, theta: ParamVector) -> float:
        return float(self.log_joint_batch(x, np.asarray(z)[None], theta)[0])

    def weighted_grad_theta(self, x, zs, weights, theta: ParamVector) -> ParamVector:
        x = self._check_counts(x)
        zs = self._check_counts(zs)
        if zs.ndim == 2:
            zs = zs[None]
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        k = zs.shape[0]
        y = np.concatenate([np.broadcast_to(x, (k,) + x.shape), zs], axis=2)
        a, s = self._preactivation(y, theta)
        da = _rate_residual(y, a)
        gb = np.einsum("k,ktn->n", w, da)
        gw = np.einsum("k,ktn,ktm->nm", w, da, s)
        return pack([("b", gb), ("W", gw)])

    def grad_theta_log_joint(self, x, z, theta: ParamVector) -> ParamVector:
        return self.weighted_grad_theta(x, np.asarray(z)[None], np.ones(1), theta)

    def simulate_train(self, theta: ParamVector, t_len: int, rng: RngStream) -> SpikeTrain:
        """Ancestral simulation: each row Poisson given the filtered past."""
        if t_len < 1:
            raise ValueError(f"t_len must be >= 1, got {t_len}")
        b = theta.segment("b")
        w = theta.segment("W")
        psi_rev = self.basis.psi[::-1]
        lag = self.basis.length
        y = np.zeros((t_len, self.n), dtype=np.int64)
        hist = np.zeros((lag, self.n))
        for t in range(t_len):
            filtered = psi_rev @ hist
            rates = softplus(b + w @ filtered)
            row = np.minimum(rng.poisson(rates), COUNT_CAP)
            y[t] = row
            hist = np.roll(hist, -1, axis=0)
            hist[-1] = row
        return SpikeTrain(y, self.visible)

    def simulate(self, theta: ParamVector, rng: RngStream):
        train = self.simulate_train(theta, self.sim_len, rng)
        return train.x, train.z


class PoglmProposal(Proposal):
    """q(z_t | spikes before t; phi) = Poisson(softplus(b_q + W_q . s_t)),
    one GLM row per hidden neuron, reading the filtered full history."""

    reparameterizable = False

    def __init__(self, visible: int, hidden: int, basis: Basis | None = None):
        self.visible = int(visible)
        self.hidden = int(hidden)
        self.n = self.visible + self.hidden
        self.basis = basis if basis is not None else Basis.exponential()

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([("b_q", np.zeros(self.hidden)),
                     ("W_q", np.zeros((self.hidden, self.n)))])

    def sample(self, x, phi: ParamVector, k: int, rng: RngStream):
        """k hidden trains sampled sequentially. Returns (k, T, H) counts."""
        x = np.asarray(x, dtype=np.float64)
        t_len = x.shape[0]
        b_q = phi.segment("b_q")
        w_q = phi.segment("W_q")
        w_vis = w_q[:, :self.visible]
        w_hid = w_q[:, self.visible:]
        s_vis = filter_history(x, self.basis.psi)      # shared across samples
        psi_rev = self.basis.psi[::-1]
        lag = self.basis.length
        z = np.zeros((k, t_len, self.hidden), dtype=np.int64)
        zhist = np.zeros((k, lag, self.hidden))
        drive_vis = s_vis @ w_vis.T + b_q              # (T, H)
        for t in range(t_len):
            s_z = np.einsum("l,klh->kh", psi_rev, zhist)
            rates = softplus(drive_vis[t] + s_z @ w_hid.T)
            row = np.minimum(rng.poisson(rates), COUNT_CAP)
            z[:, t, :] = row
            zhist = np.roll(zhist, -1, axis=1)
            zhist[:, -1, :] = row
        return z

    def _preactivation(self, x, zs, phi: ParamVector):
        x = np.asarray(x, dtype=np.float64)
        zs = np.asarray(zs, dtype=np.float64)
        if zs.ndim == 2:
            zs = zs[None]
        k = zs.shape[0]
        y = np.concatenate([np.broadcast_to(x, (k,) + x.shape), zs], axis=2)
        s = filter_history(y, self.basis.psi)
        a = s @ phi.segment("W_q").T + phi.segment("b_q")
        return a, s, zs

    def log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        a, _, zs = self._preactivation(x, zs, phi)
        return _poisson_terms(zs, a).sum(axis=(1, 2))

    def log_density(self, z, x, phi: ParamVector) -> float:
        return float(self.log_density_batch(np.asarray(z)[None], x, phi)[0])

    def weighted_grad_phi(self, x, zs, weights, phi: ParamVector) -> ParamVector:
        a, s, zs = self._preactivation(x, zs, phi)
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        da = _rate_residual(zs, a)
        gb = np.einsum("k,kth->h", w, da)
        gw = np.einsum("k,kth,ktn->hn", w, da, s)
        return pack([("b_q", gb), ("W_q", gw)])

    def grad_phi_log_density(self, z, x, phi: ParamVector) -> ParamVector:
        return self.weighted_grad_phi(x, np.asarray(z)[None], np.ones(1), phi)

    def sample_and_score(self, x, phi: ParamVector, k: int, rng: RngStream):
        """(Z, log densities, summed score) in one call."""
        z = self.sample(x, phi, k, rng)
        logq = self.log_density_batch(z, x, phi)
        score = self.weighted_grad_phi(x, z, np.ones(k), phi)
        return z, logq, score


def parameter_error(theta_hat: ParamVector, theta_true: ParamVector,
                    visible: int) -> dict:
    """Mean absolute errors of biases and weights, plus the four coupling
    blocks (v->v, h->v, v->h, h->h); block names read target<-source."""
    b_hat, b_true = theta_hat.segment("b"), theta_true.segment("b")
    w_hat, w_true = theta_hat.segment("W"), theta_true.segment("W")
    if b_hat.shape != b_true.shape or w_hat.shape != w_true.shape:
        raise ValueError("parameter shapes disagree")
    v = visible
    db = np.abs(b_hat - b_true)
    dw = np.abs(w_hat - w_true)
    return {
        "bias_error": float(db.mean()),
        "weight_error": float(dw.mean()),
        "vv": float(dw[:v, :v].mean()) if v else float("nan"),
        "hv": float(dw[:v, v:].mean()) if v and dw.shape[1] > v else float("nan"),
        "vh": float(dw[v:, :v].mean()) if v and dw.shape[0] > v else float("nan"),
        "hh": float(dw[v:, v:].mean()) if dw.shape[0] > v else float("nan"),
    }
