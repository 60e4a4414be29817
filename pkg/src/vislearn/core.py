"""Numerically stable scalar kernels and the Adam optimizer.

Everything here is double precision. logsumexp is the workhorse behind
the log-space estimators; softplus/sigmoid are the links used by the
model families; Adam consumes flat ParamVectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .params import ParamVector


def logsumexp(v, axis=None):
    """ln sum exp(v), shifted by the max so large inputs cannot overflow.

    An all-(-inf) input returns -inf. Empty input is an error.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("logsumexp of an empty vector")
    m = v.max(axis=axis, keepdims=True)
    if np.isfinite(m).all():
        out = np.log(np.exp(v - m).sum(axis=axis, keepdims=True)) + m
    else:
        # max of -inf stays -inf; make the shift a no-op there so the
        # subtraction never produces inf - inf
        shift = np.where(np.isfinite(m), m, 0.0)
        with np.errstate(divide="ignore"):
            out = np.log(np.exp(v - shift).sum(axis=axis, keepdims=True)) + shift
        out = np.where(np.isfinite(m), out, m)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def log_softmax(v, axis=None):
    """v - logsumexp(v): log of the normalized weights."""
    v = np.asarray(v, dtype=np.float64)
    lse = logsumexp(v, axis=axis)
    if axis is None:
        return v - lse
    return v - np.expand_dims(lse, axis)


def softmax(v, axis=None):
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("softmax of an empty vector")
    m = v.max(axis=axis, keepdims=True)
    if not np.isfinite(m).all():
        return np.exp(log_softmax(v, axis=axis))
    e = np.exp(v - m)
    return e / e.sum(axis=axis, keepdims=True)


def softplus(x):
    """ln(1 + e^x), computed as max(x,0) + ln(1+e^-|x|) so it never overflows."""
    x = np.asarray(x, dtype=np.float64)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    if np.isscalar(x) or x.ndim == 0:
        return float(out)
    return out


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                   np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    if np.isscalar(x) or x.ndim == 0:
        return float(out)
    return out


def softplus_deriv(x):
    """d/dx softplus(x) = sigmoid(x)."""
    return sigmoid(x)


def sigmoid_deriv(x):
    s = sigmoid(x)
    return s * (1.0 - s)


def inverse_softplus(y):
    """x with softplus(x) = y, for y > 0."""
    y = np.asarray(y, dtype=np.float64)
    out = y + np.log(-np.expm1(-y))
    if np.isscalar(y) or y.ndim == 0:
        return float(out)
    return out


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter vector."""
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: ParamVector, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(m=np.zeros(params.size), v=np.zeros(params.size),
                   t=0, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params: ParamVector, grad: ParamVector, state: AdamState,
              lr: float) -> ParamVector:
    """One Adam update. Moves against grad (descent); callers wanting
    ascent pass the negated gradient. Mutates state.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if grad.size != params.size or state.m.size != params.size:
        raise ValueError(
            f"dimension mismatch: params {params.size}, grad {grad.size}, "
            f"state {state.m.size}"
        )
    g = grad.values
    bad = ~np.isfinite(g)
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericError(
            f"non-finite gradient entry in segment "
            f"{grad.segment_of_index(i)!r} (flat index {i}, value {g[i]})"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    new_values = params.values - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params.with_values(new_values)


def clip_global_norm(grad: ParamVector, max_norm: float) -> ParamVector:
    """Rescale grad so its Euclidean norm does not exceed max_norm."""
    norm = float(np.linalg.norm(grad.values))
    if norm > max_norm:
        return grad.with_values(grad.values * (max_norm / norm))
    return grad


def central_difference(f, x: ParamVector, h: float = 1e-5,
                       indices=None) -> np.ndarray:
    """Two-sided finite-difference gradient of a scalar f at x.

    indices restricts the computation to a subset of flat coordinates
    (the returned array still has x.size entries, zero elsewhere);
    useful when x is large and only sampled coordinates are checked.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    out = np.zeros(x.size)
    idx = range(x.size) if indices is None else indices
    base = x.values
    for i in idx:
        vp = base.copy()
        vp[i] += h
        vm = base.copy()
        vm[i] -= h
        fp = f(x.with_values(vp))
        fm = f(x.with_values(vm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(
                f"non-finite function value in central difference at "
                f"coordinate {i} (segment {x.segment_of_index(i)!r})"
            )
        out[i] = (fp - fm) / (2.0 * h)
    return out
