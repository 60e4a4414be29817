"""Contracts every model family implements.

A LatentModel owns the joint density p(x, z; theta); a Proposal owns
q(z | x; phi). Latent representations are model-specific (a float for
the mixture, a small vector for the autoencoder, a count matrix for the
spiking model, a grid index for the enumerable oracle); a (K, ...)
stack of them iterates over axis 0.

The weighted_* operations compute sum_k w_k * (per-sample gradient)
without materializing per-sample gradient rows; the defaults here loop
over the scalar contract, and large models override them with fused
backward passes.
"""
from __future__ import annotations

import numpy as np

from .errors import CapabilityError
from .params import ParamVector
from .rng import RngStream


class LatentModel:
    """Joint density, its gradients, and ancestral simulation."""

    def init_params(self, rng: RngStream) -> ParamVector:
        raise NotImplementedError

    def log_joint(self, x, z, theta: ParamVector) -> float:
        raise NotImplementedError

    def grad_theta_log_joint(self, x, z, theta: ParamVector) -> ParamVector:
        raise NotImplementedError

    def simulate(self, theta: ParamVector, rng: RngStream):
        """One draw (x, z) from the generative model."""
        raise NotImplementedError

    # Batched-over-K surface; override where speed matters.
    def log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        return np.array([self.log_joint(x, z, theta) for z in zs])

    def weighted_grad_theta(self, x, zs, weights, theta: ParamVector) -> ParamVector:
        acc = np.zeros(theta.size)
        for w, z in zip(weights, zs):
            acc += w * self.grad_theta_log_joint(x, z, theta).values
        return ParamVector(acc, theta.layout)

    # Differentiability in z, required by reparameterized partners only.
    def grad_z_log_joint(self, x, z, theta: ParamVector):
        raise CapabilityError(f"{type(self).__name__} has no z-gradient")

    def grad_z_log_joint_batch(self, x, zs, theta: ParamVector) -> np.ndarray:
        return np.stack([np.atleast_1d(self.grad_z_log_joint(x, z, theta))
                         for z in zs])

    # Oracle surface (small models only).
    def exact_log_marginal(self, x, theta: ParamVector) -> float:
        raise CapabilityError(f"{type(self).__name__} has no exact marginal")

    def enumerate_latents(self, x, theta: ParamVector):
        """(latents, posterior masses) over the full latent support."""
        raise CapabilityError(f"{type(self).__name__} is not enumerable")


class Proposal:
    """Conditional sampling distribution over latents, with scores."""

    reparameterizable: bool = False

    def init_params(self, rng: RngStream) -> ParamVector:
        raise NotImplementedError

    def sample(self, x, phi: ParamVector, k: int, rng: RngStream):
        raise NotImplementedError

    def log_density(self, z, x, phi: ParamVector) -> float:
        raise NotImplementedError

    def grad_phi_log_density(self, z, x, phi: ParamVector) -> ParamVector:
        raise NotImplementedError

    def log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        return np.array([self.log_density(z, x, phi) for z in zs])

    def weighted_grad_phi(self, x, zs, weights, phi: ParamVector) -> ParamVector:
        acc = np.zeros(phi.size)
        for w, z in zip(weights, zs):
            acc += w * self.grad_phi_log_density(z, x, phi).values
        return ParamVector(acc, phi.layout)

    # Reparameterization surface.
    def sample_noise(self, x, phi: ParamVector, k: int, rng: RngStream):
        raise CapabilityError(f"{type(self).__name__} is not reparameterizable")

    def transform(self, eps, x, phi: ParamVector):
        raise CapabilityError(f"{type(self).__name__} is not reparameterizable")

    def grad_z_log_density(self, z, x, phi: ParamVector):
        raise CapabilityError(f"{type(self).__name__} has no z-gradient")

    def grad_z_log_density_batch(self, zs, x, phi: ParamVector) -> np.ndarray:
        return np.stack([np.atleast_1d(self.grad_z_log_density(z, x, phi))
                         for z in zs])

    def weighted_transform_vjp(self, x, eps, phi: ParamVector,
                               upstream, weights) -> ParamVector:
        """sum_k weights_k * (dz_k / dphi)^T upstream_k, where
        z_k = transform(eps_k, x, phi)."""
        raise CapabilityError(f"{type(self).__name__} is not reparameterizable")
