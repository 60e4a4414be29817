"""Two-layer tanh MLP autoencoder with Bernoulli pixels.

Decoder: logits = W_dec2 tanh(W_dec1 z + b_dec1) + b_dec2.
Encoder: h = tanh(W_enc x + b_enc); mu = W_mu h + b_mu;
         ln sigma = W_sigma h + b_sigma; q(z|x) = N(mu, diag sigma^2).

Forward and backward passes are written by hand so every gradient used
by the trainers can be checked against finite differences with no
autodiff in the loop. The Bernoulli term is computed from logits as
x*l - softplus(l), which stays finite for any logit.

The weighted_* operations push the per-sample weights into the single
backward pass instead of materializing K gradient rows of ~100k
parameters each. A one-slot cache keyed on the exact (x, zs, params)
objects lets the trainer's consecutive calls share one forward pass.
"""
from __future__ import annotations

import numpy as np

from ..contracts import LatentModel, Proposal
from ..core import sigmoid, softplus
from ..params import ParamVector, pack
from ..rng import RngStream
from .mixture import LOG_2PI


WEIGHT_INIT_STD = 0.01


def _init_weight(rng: RngStream, rows: int, cols: int) -> np.ndarray:
    # small-variance init keeps the fresh decoder nearly z-independent,
    # so the initial importance ratios are non-degenerate; a fan-in-scale
    # random decoder spreads log ratios over tens of nats and the
    # finite-sample chi^2 objective then collapses the proposal onto a
    # single draw
    return rng.normal(0.0, WEIGHT_INIT_STD, size=(rows, cols))


class VaeModel(LatentModel):
    """Standard-normal prior over z plus the Bernoulli decoder."""

    def __init__(self, latent_dim: int = 2, data_dim: int = 784,
                 hidden_dim: int = 128):
        self.latent_dim = int(latent_dim)
        self.data_dim = int(data_dim)
        self.hidden_dim = int(hidden_dim)
        self._cache = None

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([
            ("W_dec1", _init_weight(rng, self.hidden_dim, self.latent_dim)),
            ("b_dec1", np.zeros(self.hidden_dim)),
            ("W_dec2", _init_weight(rng, self.data_dim, self.hidden_dim)),
            ("b_dec2", np.zeros(self.data_dim)),
        ])

    def decode_batch(self, zs, theta: ParamVector):
        """(logits, hidden activations) for a (K, D) stack of latents."""
        zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        h = np.tanh(zs @ theta.segment("W_dec1").T + theta.segment("b_dec1"))
        logits = h @ theta.segment("W_dec2").T + theta.segment("b_dec2")
        return logits, h

    def decode(self, z, theta: ParamVector) -> np.ndarray:
        return self.decode_batch(np.asarray(z)[None], theta)[0][0]

    def _forward(self, x, zs, theta: ParamVector):
        """Cached forward pass: returns (zs, logits, h, dl_tilde, dh_tilde)
        where dl_tilde[k] = x - sigmoid(logits[k]) is the unweighted
        upstream of the Bernoulli term and dh_tilde its pullback to h."""
        c = self._cache
        if c is not None and c[0] is x and c[1] is zs and c[2] is theta.values:
            return c[3]
        x_arr = np.asarray(x, dtype=np.float64)
        if np.any(x_arr < 0) or np.any(x_arr > 1):
            raise ValueError("observations must lie in [0, 1]")
        zs_arr = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        logits, h = self.decode_batch(zs_arr, theta)
        dl = x_arr[None, :] - sigmoid(logits)
        dh = dl @ theta.segment("W_dec2")
        out = (zs_arr, x_arr, logits, h, dl, dh)
        self._cache = (x, zs, theta.values, out)
        return out

    def log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        zs_arr, x_arr, logits, _, _, _ = self._forward(x, zs, theta)
        prior = -0.5 * self.latent_dim * LOG_2PI - 0.5 * np.sum(zs_arr ** 2, axis=1)
        lik = np.sum(x_arr[None, :] * logits - softplus(logits), axis=1)
        return prior + lik

    def log_joint(self, x, z, theta: ParamVector) -> float:
        return float(self.log_joint_batch(x, np.asarray(z)[None], theta)[0])

    def weighted_grad_theta(self, x, zs, weights, theta: ParamVector) -> ParamVector:
        zs_arr, _, _, h, dl, dh = self._forward(x, zs, theta)
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        wdl = w[:, None] * dl
        g_w2 = wdl.T @ h
        g_b2 = wdl.sum(axis=0)
        da1 = (w[:, None] * dh) * (1.0 - h * h)
        g_w1 = da1.T @ zs_arr
        g_b1 = da1.sum(axis=0)
        return pack([("W_dec1", g_w1), ("b_dec1", g_b1),
                     ("W_dec2", g_w2), ("b_dec2", g_b2)])

    def grad_theta_log_joint(self, x, z, theta: ParamVector) -> ParamVector:
        return self.weighted_grad_theta(x, np.asarray(z)[None], np.ones(1), theta)

    def grad_z_log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        zs_arr, _, _, h, _, dh = self._forward(x, zs, theta)
        return (dh * (1.0 - h * h)) @ theta.segment("W_dec1") - zs_arr

    def grad_z_log_joint(self, x, z, theta: ParamVector):
        return self.grad_z_log_joint_batch(x, np.asarray(z)[None], theta)[0]

    def simulate(self, theta: ParamVector, rng: RngStream):
        z = rng.standard_normal(self.latent_dim)
        probs = sigmoid(self.decode(z, theta))
        x = (rng.uniform(size=self.data_dim) < probs).astype(np.float64)
        return x, z


class VaeProposal(Proposal):
    """Gaussian encoder q(z|x) = N(mu(x), diag sigma(x)^2)."""

    reparameterizable = True

    def __init__(self, latent_dim: int = 2, data_dim: int = 784,
                 hidden_dim: int = 128):
        self.latent_dim = int(latent_dim)
        self.data_dim = int(data_dim)
        self.hidden_dim = int(hidden_dim)
        self._cache = None

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([
            ("W_enc", _init_weight(rng, self.hidden_dim, self.data_dim)),
            ("b_enc", np.zeros(self.hidden_dim)),
            ("W_mu", _init_weight(rng, self.latent_dim, self.hidden_dim)),
            ("b_mu", np.zeros(self.latent_dim)),
            ("W_sigma", _init_weight(rng, self.latent_dim, self.hidden_dim)),
            ("b_sigma", np.zeros(self.latent_dim)),
        ])

    def encode(self, x, phi: ParamVector):
        """(mu, log_sigma, hidden activations) for one observation."""
        c = self._cache
        if c is not None and c[0] is x and c[1] is phi.values:
            return c[2]
        x_arr = np.asarray(x, dtype=np.float64)
        h = np.tanh(phi.segment("W_enc") @ x_arr + phi.segment("b_enc"))
        mu = phi.segment("W_mu") @ h + phi.segment("b_mu")
        log_sigma = phi.segment("W_sigma") @ h + phi.segment("b_sigma")
        out = (mu, log_sigma, h, x_arr)
        self._cache = (x, phi.values, out)
        return out

    def sample_noise(self, x, phi: ParamVector, k: int, rng: RngStream):
        return rng.standard_normal((k, self.latent_dim))

    def transform(self, eps, x, phi: ParamVector):
        mu, log_sigma, _, _ = self.encode(x, phi)
        return mu + np.exp(log_sigma) * np.atleast_2d(np.asarray(eps, dtype=np.float64))

    def sample(self, x, phi: ParamVector, k: int, rng: RngStream):
        return self.transform(self.sample_noise(x, phi, k, rng), x, phi)

    def log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        mu, log_sigma, _, _ = self.encode(x, phi)
        zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        u = (zs - mu) * np.exp(-log_sigma)
        return np.sum(-0.5 * LOG_2PI - log_sigma - 0.5 * u * u, axis=1)

    def log_density(self, z, x, phi: ParamVector) -> float:
        return float(self.log_density_batch(np.asarray(z)[None], x, phi)[0])

    def _head_backward(self, d_mu, d_log_sigma, phi: ParamVector, h, x_arr):
        """Pull summed head gradients back through the shared encoder body."""
        g_wm = np.outer(d_mu, h)
        g_ws = np.outer(d_log_sigma, h)
        dh = phi.segment("W_mu").T @ d_mu + phi.segment("W_sigma").T @ d_log_sigma
        da = dh * (1.0 - h * h)
        g_we = np.outer(da, x_arr)
        return pack([("W_enc", g_we), ("b_enc", da),
                     ("W_mu", g_wm), ("b_mu", d_mu),
                     ("W_sigma", g_ws), ("b_sigma", d_log_sigma)])

    def weighted_grad_phi(self, x, zs, weights, phi: ParamVector) -> ParamVector:
        mu, log_sigma, h, x_arr = self.encode(x, phi)
        zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        inv_var = np.exp(-2.0 * log_sigma)
        diff = zs - mu
        d_mu = w @ (diff * inv_var)
        d_log_sigma = w @ (diff * diff * inv_var - 1.0)
        return self._head_backward(d_mu, d_log_sigma, phi, h, x_arr)

    def grad_phi_log_density(self, z, x, phi: ParamVector) -> ParamVector:
        return self.weighted_grad_phi(x, np.asarray(z)[None], np.ones(1), phi)

    def grad_z_log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        mu, log_sigma, _, _ = self.encode(x, phi)
        zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        return -(zs - mu) * np.exp(-2.0 * log_sigma)

    def grad_z_log_density(self, z, x, phi: ParamVector):
        return self.grad_z_log_density_batch(np.asarray(z)[None], x, phi)[0]

    def weighted_transform_vjp(self, x, eps, phi: ParamVector,
                               upstream, weights) -> ParamVector:
        # z = mu + sigma .* eps: dz/dmu = I, dz/dlog_sigma = diag(sigma .* eps)
        mu, log_sigma, h, x_arr = self.encode(x, phi)
        eps = np.atleast_2d(np.asarray(eps, dtype=np.float64))
        u = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        wu = w[:, None] * u
        d_mu = wu.sum(axis=0)
        d_log_sigma = (wu * eps).sum(axis=0) * np.exp(log_sigma)
        return self._head_backward(d_mu, d_log_sigma, phi, h, x_arr)
