"""Estimator-law checks against the enumerable oracle that complement
the acceptance suite: expectation orderings by exhaustive enumeration,
the self-normalized theta-gradient's direction, and the evaluation
loop's error against the predicted-variance yardstick."""
import itertools

import numpy as np

from vislearn.estimators import SampleBatch, ln_p_hat
from vislearn.gradients import grad_theta_ln_p_hat, GradBatch
from vislearn.models import (CategoricalProposal, ConjugateGaussianModel,
                             EnumerableToyModel, GaussianProposal)
from vislearn.rng import RngStream
from vislearn.training import evaluate


def _setup(m_points=9, blend=0.5, x=1):
    model = EnumerableToyModel(np.linspace(-4, 4, m_points))
    prop = CategoricalProposal(model.m)
    theta = model.bimodal_params(centers=(-1.5, 2.0), scales=(1.2, 0.8),
                                 uniform=0.2)
    post = model.exact_posterior(x, theta)
    q = (1 - blend) * post + blend / model.m
    phi = prop.make_params(q)
    return model, prop, theta, phi, q, x


def test_expectation_ordering_by_enumeration():
    # E[elbo_hat] <= E[ln_p_hat] <= ln p(x), all three exactly enumerable
    model, prop, theta, phi, q, x = _setup()
    log_w = np.log(model.joint_masses(x, theta)) - np.log(q)
    exact_ln_p = model.exact_log_marginal(x, theta)
    exact_elbo = model.exact_elbo(x, theta, q)
    for k in (2, 3):
        e_lnp = 0.0
        for combo in itertools.product(range(model.m), repeat=k):
            idx = np.array(combo)
            b = SampleBatch(log_w[idx], np.zeros(k))
            e_lnp += float(np.prod(q[idx])) * ln_p_hat(b)
        assert exact_elbo <= e_lnp + 1e-12
        assert e_lnp <= exact_ln_p + 1e-12


def test_mean_ln_p_hat_nondecreasing_in_k():
    # the proposal blend keeps chi^2 ~ 0.9 so the K-to-K mean gaps
    # (chi^2/2K differences) clear the 500-repeat noise floor
    model = EnumerableToyModel()
    prop = CategoricalProposal(model.m)
    theta = model.bimodal_params()
    x = 1
    q = 0.3 * model.exact_posterior(x, theta) + 0.7 / model.m
    phi = prop.make_params(q)
    root = RngStream(444)
    means = []
    for ki, k in enumerate((1, 2, 5, 10, 50)):
        vals = np.zeros(500)
        for rep in range(500):
            zs = prop.sample(x, phi, k, root.child(ki, rep))
            vals[rep] = ln_p_hat(SampleBatch(
                model.log_joint_batch(x, zs, theta),
                prop.log_density_batch(zs, x, phi), zs))
        means.append(vals.mean())
    assert np.all(np.diff(means) > 0), means


def test_self_normalized_theta_gradient_direction():
    # mean of the self-normalized gradient is magnitude-biased but its
    # direction aligns with the exact gradient (cosine > 0.95 at K=500)
    model, prop, theta, phi, q, x = _setup(m_points=21, blend=0.4)
    eye = np.eye(model.m)
    root = RngStream(445)
    acc = np.zeros(model.m)
    n = 300
    for i in range(n):
        zs = prop.sample(x, phi, 500, root.child(i))
        batch = SampleBatch(model.log_joint_batch(x, zs, theta),
                            prop.log_density_batch(zs, x, phi), zs)
        gb = GradBatch(batch, theta.layout, phi.layout,
                       dlogjoint_dtheta=eye[zs] - model.prior(theta),
                       dlogq_dphi=eye[zs] - q)
        acc += grad_theta_ln_p_hat(gb).values
    mean = acc / n
    exact = model.exact_grad_theta_marginal(x, theta)   # d p / d logits
    # direction of d ln p = d p / p: same direction as d p
    cosine = float(mean @ exact / (np.linalg.norm(mean) * np.linalg.norm(exact)))
    assert cosine > 0.95, cosine


def test_evaluate_error_within_predicted_variance_band():
    model, prop, theta, phi, q, x = _setup(m_points=41, blend=0.4)
    chi2 = model.exact_chi2(x, theta, q)
    exact = model.exact_log_marginal(x, theta)
    eval_k = 10 ** 4
    out = evaluate(model, prop, theta, phi, [x], eval_k, RngStream(7))
    # Delta method: sd of ln p_hat is roughly sd(p_hat)/p = sqrt(chi2/K)
    se = np.sqrt(chi2 / eval_k)
    assert abs(out["ll"] - exact) <= 3 * se + abs(chi2 / (2 * eval_k))


def test_conjugate_evaluate_independent_of_k():
    model, prop = ConjugateGaussianModel(), GaussianProposal()
    theta = model.init_params(RngStream(0))
    x = 0.3
    mean, std = model.posterior_mean_std(x)
    phi = prop.make_params(mean, std)
    exact = model.exact_log_marginal(x, theta)
    lls = [evaluate(model, prop, theta, phi, [x], k, RngStream(k))["ll"]
           for k in (1, 10, 1000)]
    assert max(abs(v - exact) for v in lls) < 1e-6
