"""Toy four-component Gaussian mixture with a Bernoulli emission.

Generative story: component i drawn with weights
(pi1, pi2, pi3, pi4) = ((1-pi)/2, (1-pi)/2, pi/2, pi/2), pi = sigmoid(raw_pi);
z ~ N(mu_i, 1); x ~ Bern(sigmoid(z)). The posterior p(z|x) is multimodal,
which is what makes the proposal-fitting behavior of the different
learners visible.

Also hosts the grid-supported EnumerableToyModel: same Bernoulli emission
but a categorical prior over a fixed grid of latent values, so marginals,
posteriors, chi^2 divergences and gradients are all exactly enumerable.
It exists purely as a testing oracle.
"""
from __future__ import annotations

import numpy as np

from ..contracts import LatentModel, Proposal
from ..core import log_softmax, logsumexp, sigmoid, softmax, softplus
from ..params import ParamVector, pack
from ..rng import RngStream

LOG_2PI = float(np.log(2.0 * np.pi))

DEFAULT_MU_INIT = np.array([-1.0, -0.5, 0.5, 1.0])


def mixture_weights(raw_pi: float) -> np.ndarray:
    pi = sigmoid(raw_pi)
    return np.array([(1 - pi) / 2, (1 - pi) / 2, pi / 2, pi / 2])


def _log_bern(x, z):
    # ln Bern(x; sigmoid(z)) = x*z - softplus(z), stable for any z
    return x * np.asarray(z, dtype=np.float64) - softplus(z)


class MixtureModel(LatentModel):
    """p(x, z; theta) with theta = (raw_pi, mu[4]). Latents are scalars."""

    n_components = 4

    def __init__(self):
        # one-slot caches of the component log-density matrix and the
        # responsibilities, keyed on the exact (zs, theta.values)
        # objects the trainer reuses within a step
        self._cache = None
        self._rcache = None

    def init_params(self, rng: RngStream) -> ParamVector:
        # symmetric init plus a small jitter so components can separate
        mu = DEFAULT_MU_INIT + 0.01 * rng.standard_normal(4)
        return pack([("raw_pi", np.zeros(())), ("mu", mu)])

    @staticmethod
    def make_params(pi: float, mu) -> ParamVector:
        if not 0.0 < pi < 1.0:
            raise ValueError(f"pi must lie in (0, 1), got {pi}")
        raw = np.log(pi) - np.log1p(-pi)
        return pack([("raw_pi", np.asarray(raw)), ("mu", np.asarray(mu, dtype=np.float64))])

    def _log_comps(self, zs, theta):
        """(K, 4) rows of ln pi_i + ln N(z; mu_i, 1)."""
        c = self._cache
        if c is not None and c[0] is zs and c[1] is theta.values:
            return c[2]
        raw_pi = float(theta.segment("raw_pi"))
        mu = theta.segment("mu")
        z_arr = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        lw = np.log(mixture_weights(raw_pi))
        comps = lw + (-0.5 * LOG_2PI - 0.5 * (z_arr[:, None] - mu[None, :]) ** 2)
        self._cache = (zs, theta.values, comps)
        return comps

    def log_prior_batch(self, zs, theta: ParamVector) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return logsumexp(self._log_comps(zs, theta), axis=1)

    def log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return self.log_prior_batch(zs, theta) + _log_bern(x, zs)

    def log_joint(self, x, z, theta: ParamVector) -> float:
        return float(self.log_joint_batch(x, np.array([z]), theta)[0])

    def _responsibilities(self, zs, theta):
        c = self._rcache
        if c is not None and c[0] is zs and c[1] is theta.values:
            return c[2]
        r = softmax(self._log_comps(zs, theta), axis=1)
        self._rcache = (zs, theta.values, r)
        return r

    def weighted_grad_theta(self, x, zs, weights, theta: ParamVector) -> ParamVector:
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        w = np.asarray(weights, dtype=np.float64)
        pi = sigmoid(float(theta.segment("raw_pi")))
        mu = theta.segment("mu")
        r = self._responsibilities(zs, theta)           # (K, 4)
        d_raw = (r[:, 2] + r[:, 3]) - pi                # d log_joint / d raw_pi
        d_mu = r * (zs[:, None] - mu[None, :])
        return pack([("raw_pi", np.asarray(w @ d_raw)), ("mu", w @ d_mu)])

    def grad_theta_log_joint(self, x, z, theta: ParamVector) -> ParamVector:
        return self.weighted_grad_theta(x, np.array([z]), np.ones(1), theta)

    def grad_z_log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        mu = theta.segment("mu")
        r = self._responsibilities(zs, theta)
        d_prior = (r * (mu[None, :] - zs[:, None])).sum(axis=1)
        return (d_prior + (x - sigmoid(zs)))[:, None]

    def grad_z_log_joint(self, x, z, theta: ParamVector):
        return self.grad_z_log_joint_batch(x, np.array([z]), theta)[0]

    def simulate(self, theta: ParamVector, rng: RngStream):
        x, z = simulate_mixture(theta, 1, rng)
        return int(x[0]), float(z[0])

    def eval_ll_vector(self, xs, theta: ParamVector, proposal, phi: ParamVector,
                       k: int, rng: RngStream) -> np.ndarray:
        """Vectorized per-point IS log-marginal estimates: the grouped
        (n, k) formulation of what the generic evaluation loop does."""
        xs = np.asarray(xs)
        out = np.zeros(xs.shape[0])
        for x in (0, 1):
            mask = np.where(xs == x)[0]
            if mask.size == 0:
                continue
            eps = rng.child(x).standard_normal(mask.size * k)
            zs = proposal.transform(eps, x, phi)
            diffs = (self.log_joint_batch(x, zs, theta)
                     - proposal.log_density_batch(zs, x, phi))
            out[mask] = logsumexp(diffs.reshape(mask.size, k), axis=1) - np.log(k)
        return out

    def exact_log_marginal(self, x, theta: ParamVector, nodes: int = 2000) -> float:
        """ln p(x; theta) by Gauss-Legendre quadrature over a latent range
        wide enough (+-10 around the extreme means) that the truncated
        tails are negligible at double precision."""
        mu = theta.segment("mu")
        lo, hi = float(mu.min()) - 10.0, float(mu.max()) + 10.0
        t, w = np.polynomial.legendre.leggauss(nodes)
        zs = lo + (hi - lo) * (t + 1.0) / 2.0
        logw = np.log(w * (hi - lo) / 2.0)
        return float(logsumexp(self.log_joint_batch(x, zs, theta) + logw))

    def posterior_curve(self, x, theta: ParamVector, grid) -> np.ndarray:
        """p(z | x; theta) evaluated on an ascending grid."""
        grid = np.asarray(grid, dtype=np.float64)
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly ascending")
        ln_marg = self.exact_log_marginal(x, theta)
        return np.exp(self.log_joint_batch(x, grid, theta) - ln_marg)


def simulate_mixture(theta: ParamVector, n: int, rng: RngStream):
    """n iid draws of (x, z) from the mixture. Returns (x array, z array)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    w = mixture_weights(float(theta.segment("raw_pi")))
    mu = theta.segment("mu")
    comps = rng.choice(4, size=n, p=w)
    z = mu[comps] + rng.standard_normal(n)
    x = (rng.uniform(size=n) < sigmoid(z)).astype(np.int64)
    return x, z


class MixtureProposal(Proposal):
    """q(z | x; phi) = N(c_x, sigma_x^2) with sigma_x = exp(raw_sigma_x),
    one (mean, scale) pair per observed value x in {0, 1}."""

    reparameterizable = True

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([("c", np.zeros(2)), ("raw_sigma", np.zeros(2))])

    @staticmethod
    def make_params(c0, c1, sigma0, sigma1) -> ParamVector:
        return pack([("c", np.array([c0, c1], dtype=np.float64)),
                     ("raw_sigma", np.log([sigma0, sigma1]))])

    def _cs(self, x, phi):
        c = float(phi.segment("c")[x])
        raw = float(phi.segment("raw_sigma")[x])
        return c, raw, float(np.exp(raw))

    def sample_noise(self, x, phi: ParamVector, k: int, rng: RngStream):
        return rng.standard_normal(k)

    def transform(self, eps, x, phi: ParamVector):
        c, _, s = self._cs(x, phi)
        return c + s * np.asarray(eps, dtype=np.float64)

    def sample(self, x, phi: ParamVector, k: int, rng: RngStream):
        return self.transform(self.sample_noise(x, phi, k, rng), x, phi)

    def log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        c, raw, s = self._cs(x, phi)
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return -0.5 * LOG_2PI - raw - 0.5 * ((zs - c) / s) ** 2

    def log_density(self, z, x, phi: ParamVector) -> float:
        return float(self.log_density_batch(np.array([z]), x, phi)[0])

    def weighted_grad_phi(self, x, zs, weights, phi: ParamVector) -> ParamVector:
        c, _, s = self._cs(x, phi)
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        w = np.asarray(weights, dtype=np.float64)
        u = (zs - c) / s
        dc = np.zeros(2)
        draw = np.zeros(2)
        dc[x] = float(w @ (u / s))
        draw[x] = float(w @ (u * u - 1.0))
        return pack([("c", dc), ("raw_sigma", draw)])

    def grad_phi_log_density(self, z, x, phi: ParamVector) -> ParamVector:
        return self.weighted_grad_phi(x, np.array([z]), np.ones(1), phi)

    def grad_z_log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        c, _, s = self._cs(x, phi)
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return (-(zs - c) / (s * s))[:, None]

    def grad_z_log_density(self, z, x, phi: ParamVector):
        return self.grad_z_log_density_batch(np.array([z]), x, phi)[0]

    def weighted_transform_vjp(self, x, eps, phi: ParamVector,
                               upstream, weights) -> ParamVector:
        # z = c_x + sigma_x * eps: dz/dc_x = 1, dz/draw_sigma_x = sigma_x * eps
        _, _, s = self._cs(x, phi)
        eps = np.asarray(eps, dtype=np.float64)
        u = np.asarray(upstream, dtype=np.float64).reshape(eps.shape)
        w = np.asarray(weights, dtype=np.float64)
        dc = np.zeros(2)
        draw = np.zeros(2)
        dc[x] = float(np.sum(w * u))
        draw[x] = float(np.sum(w * u * s * eps))
        return pack([("c", dc), ("raw_sigma", draw)])


class EnumerableToyModel(LatentModel):
    """Categorical prior over a fixed grid of latent values, Bernoulli
    emission through a sigmoid. Latents are grid indices. Everything of
    interest (marginal, posterior, chi^2, gradients) is computable by
    direct summation, which is the whole point."""

    def __init__(self, grid=None):
        self.grid = (np.linspace(-10.0, 10.0, 41) if grid is None
                     else np.asarray(grid, dtype=np.float64))
        self.m = self.grid.size

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([("logits", np.zeros(self.m))])

    def make_params(self, prior) -> ParamVector:
        prior = np.asarray(prior, dtype=np.float64)
        if prior.shape != (self.m,) or np.any(prior <= 0):
            raise ValueError("prior must be strictly positive over the grid")
        return pack([("logits", np.log(prior / prior.sum()))])

    def bimodal_params(self, centers=(-2.0, 3.0), scales=(1.5, 1.0),
                       uniform: float = 0.0) -> ParamVector:
        """A default two-bump prior that keeps chi^2 against simple
        proposals comfortably away from zero. `uniform` blends in a flat
        floor, which keeps every posterior mass large enough for
        per-component Monte Carlo statistics to be meaningful."""
        masses = np.zeros(self.m)
        for c, s in zip(centers, scales):
            masses += np.exp(-0.5 * ((self.grid - c) / s) ** 2)
        masses = (1.0 - uniform) * masses / masses.sum() + uniform / self.m
        return self.make_params(masses)

    def prior(self, theta: ParamVector) -> np.ndarray:
        return softmax(theta.segment("logits"))

    def _log_emission(self, x) -> np.ndarray:
        return x * self.grid - softplus(self.grid)

    def log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        idx = np.asarray(zs, dtype=np.intp)
        lp = log_softmax(theta.segment("logits"))
        return lp[idx] + self._log_emission(x)[idx]

    def log_joint(self, x, z, theta: ParamVector) -> float:
        return float(self.log_joint_batch(x, np.array([z]), theta)[0])

    def weighted_grad_theta(self, x, zs, weights, theta: ParamVector) -> ParamVector:
        idx = np.asarray(zs, dtype=np.intp)
        w = np.asarray(weights, dtype=np.float64)
        pi = self.prior(theta)
        g = -pi * w.sum()
        np.add.at(g, idx, w)
        return pack([("logits", g)])

    def grad_theta_log_joint(self, x, z, theta: ParamVector) -> ParamVector:
        return self.weighted_grad_theta(x, np.array([z]), np.ones(1), theta)

    def simulate(self, theta: ParamVector, rng: RngStream):
        idx = int(rng.choice(self.m, p=self.prior(theta)))
        x = int(rng.uniform() < sigmoid(self.grid[idx]))
        return x, idx

    # Exact quantities by direct summation.
    def joint_masses(self, x, theta: ParamVector) -> np.ndarray:
        return self.prior(theta) * np.exp(self._log_emission(x))

    def exact_marginal(self, x, theta: ParamVector) -> float:
        return float(self.joint_masses(x, theta).sum())

    def exact_log_marginal(self, x, theta: ParamVector) -> float:
        return float(np.log(self.exact_marginal(x, theta)))

    def exact_posterior(self, x, theta: ParamVector) -> np.ndarray:
        j = self.joint_masses(x, theta)
        return j / j.sum()

    def enumerate_latents(self, x, theta: ParamVector):
        return np.arange(self.m), self.exact_posterior(x, theta)

    def exact_chi2(self, x, theta: ParamVector, q: np.ndarray) -> float:
        """Forward chi^2 divergence of the exact posterior from q."""
        p = self.exact_posterior(x, theta)
        return float(np.sum(p * p / q) - 1.0)

    def exact_elbo(self, x, theta: ParamVector, q: np.ndarray) -> float:
        j = self.joint_masses(x, theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = q * (np.log(j) - np.log(q))
        return float(np.sum(np.where(q > 0, terms, 0.0)))

    def exact_grad_theta_marginal(self, x, theta: ParamVector) -> np.ndarray:
        """d p(x; theta) / d logits by enumeration."""
        pi = self.prior(theta)
        b = np.exp(self._log_emission(x))
        return pi * (b - self.exact_marginal(x, theta))

    def exact_grad_theta_elbo(self, x, theta: ParamVector, q: np.ndarray) -> np.ndarray:
        return q - self.prior(theta)

    def exact_grad_phi_elbo(self, x, theta: ParamVector, q: np.ndarray) -> np.ndarray:
        """Total derivative of the ELBO w.r.t. proposal logits."""
        d = np.log(self.joint_masses(x, theta)) - np.log(q)
        return q * (d - float(np.sum(q * d)))

    def exact_grad_phi_ln_V(self, x, theta: ParamVector, q: np.ndarray) -> np.ndarray:
        """Total derivative of ln V = ln sum j^2/q w.r.t. proposal logits."""
        j = self.joint_masses(x, theta)
        v = float(np.sum(j * j / q))
        return q - (j * j / q) / v


class CategoricalProposal(Proposal):
    """Proposal over the oracle grid: q = softmax(logits). Not
    reparameterizable (discrete), so it exercises the score-function
    estimators."""

    reparameterizable = False

    def __init__(self, m: int):
        self.m = m

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([("logits", np.zeros(self.m))])

    def make_params(self, q) -> ParamVector:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.m,) or np.any(q <= 0):
            raise ValueError("q must be strictly positive over the grid")
        return pack([("logits", np.log(q / q.sum()))])

    def probs(self, phi: ParamVector) -> np.ndarray:
        return softmax(phi.segment("logits"))

    def sample(self, x, phi: ParamVector, k: int, rng: RngStream):
        return rng.choice(self.m, size=k, p=self.probs(phi))

    def log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        idx = np.asarray(zs, dtype=np.intp)
        return log_softmax(phi.segment("logits"))[idx]

    def log_density(self, z, x, phi: ParamVector) -> float:
        return float(self.log_density_batch(np.array([z]), x, phi)[0])

    def weighted_grad_phi(self, x, zs, weights, phi: ParamVector) -> ParamVector:
        idx = np.asarray(zs, dtype=np.intp)
        w = np.asarray(weights, dtype=np.float64)
        q = self.probs(phi)
        g = -q * w.sum()
        np.add.at(g, idx, w)
        return pack([("logits", g)])

    def grad_phi_log_density(self, z, x, phi: ParamVector) -> ParamVector:
        return self.weighted_grad_phi(x, np.array([z]), np.ones(1), phi)
