"""Conjugate Gaussian toy: p(z) = N(0,1), p(x|z) = N(x; z, 1).

The posterior is N(x/2, 1/2) and the marginal is N(x; 0, 2), both in
closed form, which makes this the reference model for stationarity and
zero-gradient-at-the-optimum checks. It has no learnable theta.
"""
from __future__ import annotations

import numpy as np

from ..contracts import LatentModel, Proposal
from ..params import ParamVector, pack
from ..rng import RngStream
from .mixture import LOG_2PI


class ConjugateGaussianModel(LatentModel):

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([])

    def log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return (-0.5 * LOG_2PI - 0.5 * zs ** 2) + \
               (-0.5 * LOG_2PI - 0.5 * (x - zs) ** 2)

    def log_joint(self, x, z, theta: ParamVector) -> float:
        return float(self.log_joint_batch(x, np.array([z]), theta)[0])

    def weighted_grad_theta(self, x, zs, weights, theta: ParamVector) -> ParamVector:
        return theta.zeros_like()

    def grad_theta_log_joint(self, x, z, theta: ParamVector) -> ParamVector:
        return theta.zeros_like()

    def grad_z_log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return (-zs + (x - zs))[:, None]

    def grad_z_log_joint(self, x, z, theta: ParamVector):
        return self.grad_z_log_joint_batch(x, np.array([z]), theta)[0]

    def simulate(self, theta: ParamVector, rng: RngStream):
        z = float(rng.standard_normal())
        x = z + float(rng.standard_normal())
        return x, z

    def exact_log_marginal(self, x, theta: ParamVector) -> float:
        return float(-0.5 * LOG_2PI - 0.5 * np.log(2.0) - x * x / 4.0)

    @staticmethod
    def posterior_mean_std(x) -> tuple[float, float]:
        return x / 2.0, float(np.sqrt(0.5))


class GaussianProposal(Proposal):
    """Single unconditional Gaussian q(z; phi) = N(c, exp(raw_sigma)^2).
    Suits experiments that condition on one fixed observation."""

    reparameterizable = True

    def init_params(self, rng: RngStream) -> ParamVector:
        return pack([("c", np.zeros(())), ("raw_sigma", np.zeros(()))])

    @staticmethod
    def make_params(c, sigma) -> ParamVector:
        return pack([("c", np.asarray(float(c))),
                     ("raw_sigma", np.asarray(np.log(float(sigma))))])

    def _cs(self, phi):
        raw = float(phi.segment("raw_sigma"))
        return float(phi.segment("c")), raw, float(np.exp(raw))

    def sample_noise(self, x, phi: ParamVector, k: int, rng: RngStream):
        return rng.standard_normal(k)

    def transform(self, eps, x, phi: ParamVector):
        c, _, s = self._cs(phi)
        return c + s * np.asarray(eps, dtype=np.float64)

    def sample(self, x, phi: ParamVector, k: int, rng: RngStream):
        return self.transform(self.sample_noise(x, phi, k, rng), x, phi)

    def log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        c, raw, s = self._cs(phi)
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return -0.5 * LOG_2PI - raw - 0.5 * ((zs - c) / s) ** 2

    def log_density(self, z, x, phi: ParamVector) -> float:
        return float(self.log_density_batch(np.array([z]), x, phi)[0])

    def weighted_grad_phi(self, x, zs, weights, phi: ParamVector) -> ParamVector:
        c, _, s = self._cs(phi)
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        w = np.asarray(weights, dtype=np.float64)
        u = (zs - c) / s
        return pack([("c", np.asarray(float(w @ (u / s)))),
                     ("raw_sigma", np.asarray(float(w @ (u * u - 1.0))))])

    def grad_phi_log_density(self, z, x, phi: ParamVector) -> ParamVector:
        return self.weighted_grad_phi(x, np.array([z]), np.ones(1), phi)

    def grad_z_log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        c, _, s = self._cs(phi)
        zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
        return (-(zs - c) / (s * s))[:, None]

    def grad_z_log_density(self, z, x, phi: ParamVector):
        return self.grad_z_log_density_batch(np.array([z]), x, phi)[0]

    def weighted_transform_vjp(self, x, eps, phi: ParamVector,
                               upstream, weights) -> ParamVector:
        _, _, s = self._cs(phi)
        eps = np.asarray(eps, dtype=np.float64)
        u = np.asarray(upstream, dtype=np.float64).reshape(eps.shape)
        w = np.asarray(weights, dtype=np.float64)
        return pack([("c", np.asarray(float(np.sum(w * u)))),
                     ("raw_sigma", np.asarray(float(np.sum(w * u * s * eps))))])
