"""Learning latent-variable models by variational importance sampling.

The package pairs a direct importance-sampling maximizer of the
marginal log-likelihood (proposal trained by minimizing the forward
chi^2 divergence) with VI, CHIVI, VBIS and IWAE baselines, three model
families, exact small-scale oracles, and a CSV-first experiment CLI.
"""
from .core import (AdamState, adam_step, central_difference, logsumexp,
                   sigmoid, softplus)
from .errors import CapabilityError, ConfigError, DataError, NumericError
from .estimators import (SampleBatch, cubo_hat, elbo_hat, ln_V_hat, ln_p_hat,
                         predicted_bias, predicted_variance)
from .gradients import (GradBatch, build_grad_batch, chi2_weights,
                        grad_phi_elbo_pathwise, grad_phi_elbo_score,
                        grad_phi_ln_V_pathwise, grad_phi_ln_V_score,
                        grad_phi_ln_p_hat_pathwise, grad_theta_elbo_hat,
                        grad_theta_ln_p_hat, grad_theta_p_hat,
                        importance_weights)
from .params import ParamVector, pack, unpack
from .rng import RngStream
from .training import (ExperimentData, TrainConfig, TrainLog, evaluate,
                       initial_params, train, train_chivi, train_iwae,
                       train_vbis, train_vi, train_vis)

__version__ = "0.1.0"
