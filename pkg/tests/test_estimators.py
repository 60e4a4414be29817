import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vislearn.estimators import (SampleBatch, cubo_hat, elbo_hat, ln_V_hat,
                                 ln_p_hat, predicted_bias, predicted_variance)


def _batch_from_diffs(diffs):
    d = np.asarray(diffs, dtype=np.float64)
    return SampleBatch(log_joint=d, log_q=np.zeros_like(d))


def test_elbo_single_term():
    assert elbo_hat(SampleBatch(np.array([-1.0]), np.array([-2.0]))) == 1.0


def test_elbo_self_proposal_zero():
    lj = np.array([-3.0, 0.5, 2.0])
    assert elbo_hat(SampleBatch(lj, lj.copy())) == 0.0


def test_elbo_mean_of_diffs():
    assert elbo_hat(_batch_from_diffs([0.5, -0.5, 1.5])) == pytest.approx(0.5)


def test_ln_p_hat_k1_equals_elbo():
    b = SampleBatch(np.array([-4.2]), np.array([-1.3]))
    assert ln_p_hat(b) == elbo_hat(b)


def test_ln_p_hat_constant_ratio():
    c = 0.7315
    assert ln_p_hat(_batch_from_diffs([c, c, c])) == pytest.approx(c, abs=1e-12)


def test_ln_p_hat_two_samples():
    # mean of (2, 1) is 1.5
    assert ln_p_hat(_batch_from_diffs([np.log(2.0), 0.0])) == \
        pytest.approx(np.log(1.5), abs=1e-12)


def test_ln_V_single_term_doubles():
    d = -0.9
    assert ln_V_hat(_batch_from_diffs([d])) == pytest.approx(2 * d)


def test_ln_V_constant_ratio():
    c = 1.1
    assert ln_V_hat(_batch_from_diffs([c, c])) == pytest.approx(2 * c, abs=1e-12)


def test_ln_V_two_samples():
    # mean of (4, 1) is 2.5
    assert ln_V_hat(_batch_from_diffs([np.log(2.0), 0.0])) == \
        pytest.approx(np.log(2.5), abs=1e-12)


def test_cubo_trivial_cases():
    d = 0.4
    assert cubo_hat(_batch_from_diffs([d])) == pytest.approx(d)
    assert cubo_hat(_batch_from_diffs([d, d, d])) == pytest.approx(d, abs=1e-12)


def test_cubo_dominates_ln_p_hat_on_random_batches():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        k = int(rng.integers(1, 12))
        b = SampleBatch(rng.normal(-3, 2, size=k), rng.normal(-3, 2, size=k))
        assert cubo_hat(b) >= ln_p_hat(b) - 1e-12


@given(st.lists(st.floats(-30, 30), min_size=1, max_size=20))
def test_power_mean_inequality(diffs):
    b = _batch_from_diffs(diffs)
    assert ln_V_hat(b) >= 2.0 * ln_p_hat(b) - 1e-10


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_k1_identity_property(lj, lq):
    b = SampleBatch(np.array([lj]), np.array([lq]))
    assert ln_p_hat(b) == elbo_hat(b)


def test_neg_inf_log_joint_flows_through():
    b = SampleBatch(np.array([-np.inf, 0.0]), np.array([0.0, 0.0]))
    assert ln_p_hat(b) == pytest.approx(np.log(0.5), abs=1e-12)
    all_dead = SampleBatch(np.array([-np.inf, -np.inf]), np.zeros(2))
    assert ln_p_hat(all_dead) == -np.inf


def test_batch_validation():
    with pytest.raises(ValueError):
        SampleBatch(np.array([np.nan]), np.array([0.0]))
    with pytest.raises(ValueError):
        SampleBatch(np.array([1.0, 2.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        SampleBatch(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        SampleBatch(np.array([np.inf]), np.array([0.0]))


def test_predicted_bias():
    assert predicted_bias(0.0, 7) == 0.0
    assert predicted_bias(1.0, 1) == -0.5
    assert predicted_bias(3.0, 6) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        predicted_bias(-1.0, 2)


def test_predicted_variance():
    assert predicted_variance(1.0, 0.0, 3) == 0.0
    assert predicted_variance(1.0, 2.0, 4) == pytest.approx(0.5)
    assert predicted_variance(0.5, 2.0, 1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        predicted_variance(0.0, 1.0, 1)
