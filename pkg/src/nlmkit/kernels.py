"""Dense numeric kernels shared by every model.

This module fixes the numerical conventions used everywhere else:

* all computation is IEEE-754 binary64,
* matrices are 2-D ``numpy`` arrays whose columns index sequence positions,
* attention masks may carry ``-inf`` sentinels; softmax maps them to exact 0,
* softmax subtracts the largest finite entry before exponentiation,
* layer normalization uses the population standard deviation and adds
  ``LAYER_NORM_EPS`` under the square root.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, ndtr

from .errors import ShapeError, UndefinedDistributionError

LAYER_NORM_EPS = 1e-5

GELU_TANH_COEFF = 0.044715


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-D float64 array without copying when possible."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def as_vector(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got ndim={m.ndim}")
    return m


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit shape check.

    Raises ShapeError naming both operand shapes when inner dimensions
    disagree.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def softmax(v) -> np.ndarray:
    """Probability vector from scores.

    Entries equal to -inf get probability exactly 0; the largest finite
    entry is subtracted first so no finite input can overflow.  NaN and
    +inf entries are rejected, and a vector with no finite entry has no
    defined distribution.
    """
    v = as_vector(v)
    if np.isnan(v).any():
        raise UndefinedDistributionError("softmax input contains NaN")
    if np.isposinf(v).any():
        raise UndefinedDistributionError("softmax input contains +inf")
    finite = np.isfinite(v)
    if not finite.any():
        raise UndefinedDistributionError(
            "softmax input has no finite entry; all scores are masked"
        )
    e = np.exp(v - v[finite].max())  # exp(-inf) == 0.0 exactly
    return e / e.sum()


def softmax_rows(m) -> np.ndarray:
    """Row-wise softmax; one attention-weight distribution per query row."""
    m = as_matrix(m)
    out = np.empty_like(m)
    for i in range(m.shape[0]):
        out[i] = softmax(m[i])
    return out


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    return expit(np.asarray(x, dtype=np.float64))


def tanh(x):
    return np.tanh(np.asarray(x, dtype=np.float64))


def gelu_tanh(x):
    """GELU via the tanh approximation used by the transformer models."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * x * (1.0 + np.tanh(np.sqrt(2.0 / np.pi) * (x + GELU_TANH_COEFF * x**3)))


def gelu_exact(x):
    """GELU as x * Phi(x) with Phi the standard normal CDF."""
    x = np.asarray(x, dtype=np.float64)
    return x * ndtr(x)


def gelu(x, mode: str = "tanh"):
    if mode == "tanh":
        return gelu_tanh(x)
    if mode == "exact":
        return gelu_exact(x)
    raise ValueError(f"unknown gelu mode {mode!r}; expected 'tanh' or 'exact'")


def layer_norm(x, gain, bias, eps: float = LAYER_NORM_EPS) -> np.ndarray:
    """Z-score a vector, then apply the learned gain and bias.

    Mean and standard deviation are taken over the vector itself
    (population form); eps sits under the square root so constant
    vectors normalize to the bias.
    """
    x = as_vector(x)
    gain = as_vector(gain)
    bias = as_vector(bias)
    if not (x.shape == gain.shape == bias.shape):
        raise ShapeError(
            f"layer_norm dims disagree: x {x.shape}, gain {gain.shape}, bias {bias.shape}"
        )
    mu = x.mean()
    var = x.var()
    return gain * ((x - mu) / np.sqrt(var + eps)) + bias


def layer_norm_columns(m, gain, bias, eps: float = LAYER_NORM_EPS) -> np.ndarray:
    """Apply layer_norm independently to every column of a matrix."""
    m = as_matrix(m)
    gain = as_vector(gain)
    bias = as_vector(bias)
    if m.shape[0] != gain.shape[0] or m.shape[0] != bias.shape[0]:
        raise ShapeError(
            f"layer_norm dims disagree: matrix {m.shape}, gain {gain.shape}, bias {bias.shape}"
        )
    mu = m.mean(axis=0)
    var = m.var(axis=0)
    return gain[:, None] * ((m - mu) / np.sqrt(var + eps)) + bias[:, None]
