"""Numeric kernel contracts: matmul, softmax, GELU, layer norm, sigmoid/tanh."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from nlmkit.errors import ShapeError, UndefinedDistributionError
from nlmkit.kernels import (
    gelu,
    gelu_exact,
    gelu_tanh,
    layer_norm,
    layer_norm_columns,
    matmul,
    sigmoid,
    softmax,
    softmax_rows,
)

from oracles import normal_cdf_series


class TestMatmul:
    def test_identity(self):
        m = np.arange(12.0).reshape(3, 4)
        npt.assert_array_equal(matmul(np.eye(3), m), m)

    def test_zero_annihilates(self):
        m = np.ones((3, 4))
        npt.assert_array_equal(matmul(np.zeros((2, 3)), m), np.zeros((2, 4)))

    def test_matches_triple_loop(self, rng):
        a = rng.normal(size=(4, 5))
        b = rng.normal(size=(5, 2))
        expected = np.zeros((4, 2))
        for i in range(4):
            for j in range(2):
                for k in range(5):
                    expected[i, j] += a[i, k] * b[k, j]
        npt.assert_allclose(matmul(a, b), expected, rtol=1e-13)

    def test_shape_error_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4, 5\)"):
            matmul(np.zeros((2, 3)), np.zeros((4, 5)))

    def test_associativity(self, rng):
        a, b, c = (rng.normal(size=(4, 4)) for _ in range(3))
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        npt.assert_allclose(left, right, rtol=1e-9)


class TestSoftmax:
    def test_uniform_for_equal_scores(self):
        npt.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, rtol=1e-15)

    def test_log3_gives_quarters(self):
        npt.assert_allclose(softmax([0.0, math.log(3)]), [0.25, 0.75], rtol=1e-14)

    def test_neg_inf_is_exact_zero(self):
        out = softmax([0.0, -np.inf])
        assert out[0] == 1.0
        assert out[1] == 0.0

    def test_all_masked_rejected(self):
        with pytest.raises(UndefinedDistributionError):
            softmax([-np.inf, -np.inf])

    def test_nan_rejected(self):
        with pytest.raises(UndefinedDistributionError):
            softmax([0.0, np.nan])

    def test_sums_to_one_large_dim(self, rng):
        v = rng.normal(scale=10.0, size=100_000)
        assert abs(softmax(v).sum() - 1.0) < 1e-12

    def test_shift_invariance(self, rng):
        v = rng.normal(size=64)
        for shift in (-250.0, -1.0, 3.5, 400.0):
            npt.assert_allclose(softmax(v + shift), softmax(v), atol=1e-12)

    def test_row_wise_matches_vector_form(self, rng):
        m = rng.normal(size=(5, 7))
        out = softmax_rows(m)
        for i in range(5):
            npt.assert_array_equal(out[i], softmax(m[i]))


class TestGelu:
    def test_zero(self):
        assert gelu(0.0) == 0.0
        assert gelu_exact(0.0) == 0.0

    def test_large_positive_is_identity(self):
        assert abs(gelu(10.0) - 10.0) < 1e-6
        assert abs(gelu_exact(10.0) - 10.0) < 1e-12

    def test_exact_mode_against_series_cdf(self):
        # independently computed Phi(1) = 0.8413447460685429
        assert abs(normal_cdf_series(1.0) - 0.841345) < 1e-5
        assert abs(gelu_exact(1.0) - 1.0 * normal_cdf_series(1.0)) < 1e-12

    def test_modes_agree_within_5e3(self):
        x = np.linspace(-5.0, 5.0, 10_000)
        assert np.max(np.abs(gelu_tanh(x) - gelu_exact(x))) <= 5e-3

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            gelu(1.0, mode="relu")


class TestLayerNorm:
    def test_constant_vector_regularized_to_bias(self):
        out = layer_norm([5.0, 5.0, 5.0, 5.0], np.ones(4), np.zeros(4))
        npt.assert_allclose(out, np.zeros(4), atol=1e-9)

    def test_unit_variance_vector_nearly_fixed(self):
        # eps under the root shrinks the output by ~eps/2
        out = layer_norm([1.0, -1.0], np.ones(2), np.zeros(2))
        npt.assert_allclose(out, [1.0, -1.0], atol=1e-5)

    def test_normalizes_mean_and_variance(self, rng):
        x = rng.normal(loc=3.0, scale=2.0, size=8)
        out = layer_norm(x, np.ones(8), np.zeros(8))
        assert abs(out.mean()) < 1e-12
        assert abs(out.var() - 1.0) < 1e-4

    def test_affine_input_invariance(self, rng):
        # z-scoring removes any a*x + b with a > 0, up to eps effects
        x = rng.normal(scale=10.0, size=16)
        base = layer_norm(x, np.ones(16), np.zeros(16))
        for a, b in ((2.0, -7.0), (0.5, 3.0), (10.0, 100.0)):
            npt.assert_allclose(layer_norm(a * x + b, np.ones(16), np.zeros(16)),
                                base, atol=1e-6)

    def test_gain_and_bias_applied(self, rng):
        x = rng.normal(size=6)
        gain = rng.normal(size=6)
        bias = rng.normal(size=6)
        manual = gain * layer_norm(x, np.ones(6), np.zeros(6)) + bias
        npt.assert_allclose(layer_norm(x, gain, bias), manual, rtol=1e-12, atol=1e-12)

    def test_columnwise_matches_vector_form(self, rng):
        m = rng.normal(size=(6, 4))
        gain = rng.normal(size=6)
        bias = rng.normal(size=6)
        out = layer_norm_columns(m, gain, bias)
        for j in range(4):
            npt.assert_allclose(out[:, j], layer_norm(m[:, j], gain, bias), rtol=1e-12, atol=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            layer_norm(np.zeros(3), np.zeros(4), np.zeros(3))


class TestSigmoidTanh:
    def test_fixed_points(self):
        assert sigmoid(0.0) == 0.5
        assert np.tanh(0.0) == 0.0

    def test_sigmoid_of_log3(self):
        assert abs(sigmoid(math.log(3)) - 0.75) < 1e-15

    def test_complement_identity(self, rng):
        x = rng.uniform(-30, 30, size=1000)
        npt.assert_allclose(sigmoid(x) + sigmoid(-x), 1.0, atol=1e-15)

    def test_open_interval_bounds(self, rng):
        # float64 saturates sigmoid beyond |x| ~ 36 and tanh beyond |x| ~ 19;
        # the strict bounds hold over the representable range
        s = sigmoid(rng.uniform(-36, 36, size=1000))
        assert np.all(s > 0) and np.all(s < 1)
        t = np.tanh(rng.uniform(-18, 18, size=1000))
        assert np.all(t > -1) and np.all(t < 1)
