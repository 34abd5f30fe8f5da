import numpy as np
import pytest

from ocpad.errors import ContractViolation
from ocpad.nn import layers
from ocpad.tests.conftest import assert_gradients_close, numeric_gradient

SEEDS = range(20)


def away_from_zero(rng, shape, margin=0.05):
    """Values whose magnitude stays clear of the ReLU kink."""
    return rng.choice([-1.0, 1.0], size=shape) * rng.uniform(margin, 1.0, size=shape)


def distinct_values(rng, shape, spacing=1e-2):
    """Values pairwise at least ``spacing`` apart, so max pooling has no near-ties."""
    return rng.permutation(int(np.prod(shape))).reshape(shape) * spacing


class TestSamePadding:
    @pytest.mark.parametrize("size,kernel,stride,expected", [
        (7, 3, 1, (7, 1, 1)),
        (7, 3, 2, (4, 1, 1)),
        (8, 3, 2, (4, 0, 1)),
        (5, 1, 1, (5, 0, 0)),
        (6, 5, 1, (6, 2, 2)),
    ])
    def test_output_size_and_padding(self, size, kernel, stride, expected):
        assert layers.same_padding(size, kernel, stride) == expected


class TestConv2d:
    def test_identity_kernel(self):
        x = np.arange(2 * 1 * 4 * 5, dtype=np.float64).reshape(2, 1, 4, 5)
        weights = np.zeros((1, 1, 3, 3))
        weights[0, 0, 1, 1] = 1.0
        out, _ = layers.conv2d_forward(x, weights, np.zeros(1))
        np.testing.assert_array_equal(out, x)

    def test_stride_two_output_shape(self):
        x = np.zeros((1, 2, 7, 9), dtype=np.float32)
        out, _ = layers.conv2d_forward(x, np.zeros((3, 2, 3, 3), np.float32), np.zeros(3, np.float32), stride=2)
        assert out.shape == (1, 3, 4, 5)
        assert out.dtype == np.float32

    def test_rejects_mismatched_weights(self):
        with pytest.raises(ContractViolation):
            layers.conv2d_forward(np.zeros((1, 2, 4, 4)), np.zeros((3, 1, 3, 3)), np.zeros(3))

    @pytest.mark.parametrize("stride", [1, 2])
    @pytest.mark.parametrize("seed", SEEDS)
    def test_gradients(self, seed, stride):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(2, 2, 5, 7))
        weights = rng.normal(size=(3, 2, 3, 3))
        bias = rng.normal(size=3)
        out, cache = layers.conv2d_forward(x, weights, bias, stride)
        upstream = rng.normal(size=out.shape)
        grad_x, grad_w, grad_b = layers.conv2d_backward(upstream, cache)

        def objective():
            return float((layers.conv2d_forward(x, weights, bias, stride)[0] * upstream).sum())

        assert_gradients_close(grad_x, numeric_gradient(objective, x))
        assert_gradients_close(grad_w, numeric_gradient(objective, weights))
        assert_gradients_close(grad_b, numeric_gradient(objective, bias))


class TestMaxPool:
    def test_ceil_semantics_on_odd_sizes(self):
        x = np.arange(15, dtype=np.float64).reshape(1, 1, 3, 5)
        out, _ = layers.maxpool2_forward(x)
        np.testing.assert_array_equal(out[0, 0], [[6, 8, 9], [11, 13, 14]])

    def test_ties_route_to_first_position(self):
        x = np.ones((1, 1, 2, 2))
        out, cache = layers.maxpool2_forward(x)
        grad = layers.maxpool2_backward(np.ones_like(out), cache)
        np.testing.assert_array_equal(grad[0, 0], [[1, 0], [0, 0]])

    @pytest.mark.parametrize("seed", SEEDS)
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = distinct_values(rng, (2, 2, 5, 7))
        out, cache = layers.maxpool2_forward(x)
        upstream = rng.normal(size=out.shape)
        grad = layers.maxpool2_backward(upstream, cache)

        def objective():
            return float((layers.maxpool2_forward(x)[0] * upstream).sum())

        assert_gradients_close(grad, numeric_gradient(objective, x))


class TestUpsampleAndCrop:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_upsample_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(2, 2, 3, 4))
        upstream = rng.normal(size=(2, 2, 6, 8))
        grad = layers.upsample2_backward(upstream)

        def objective():
            return float((layers.upsample2_forward(x) * upstream).sum())

        assert_gradients_close(grad, numeric_gradient(objective, x))

    def test_crop_roundtrip_shapes(self):
        x = np.arange(2 * 1 * 4 * 6, dtype=np.float64).reshape(2, 1, 4, 6)
        out = layers.crop_forward(x, 3, 5)
        assert out.shape == (2, 1, 3, 5)
        grad = layers.crop_backward(np.ones_like(out), x.shape)
        assert grad.shape == x.shape
        assert grad[:, :, 3, :].sum() == 0 and grad[:, :, :, 5].sum() == 0
        assert grad.sum() == out.size


class TestDense:
    def test_known_values(self):
        out = layers.dense_forward(np.array([[1.0, 2.0]]), np.array([[1.0], [1.0]]), np.array([0.5]))
        np.testing.assert_array_equal(out, [[3.5]])

    def test_rejects_mismatched_input(self):
        with pytest.raises(ContractViolation):
            layers.dense_forward(np.zeros((2, 5)), np.zeros((4, 3)), np.zeros(3))

    @pytest.mark.parametrize("seed", SEEDS)
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(3, 6))
        weights = rng.normal(size=(6, 4))
        bias = rng.normal(size=4)
        upstream = rng.normal(size=(3, 4))
        grad_x, grad_w, grad_b = layers.dense_backward(upstream, x, weights)

        def objective():
            return float((layers.dense_forward(x, weights, bias) * upstream).sum())

        assert_gradients_close(grad_x, numeric_gradient(objective, x))
        assert_gradients_close(grad_w, numeric_gradient(objective, weights))
        assert_gradients_close(grad_b, numeric_gradient(objective, bias))


class TestActivations:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_relu_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = away_from_zero(rng, (2, 3, 4))
        upstream = rng.normal(size=x.shape)
        grad = layers.relu_backward(upstream, x)

        def objective():
            return float((layers.relu_forward(x) * upstream).sum())

        assert_gradients_close(grad, numeric_gradient(objective, x))

    @pytest.mark.parametrize("seed", SEEDS)
    def test_sigmoid_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(scale=2.0, size=(2, 3, 4))
        upstream = rng.normal(size=x.shape)
        grad = layers.sigmoid_backward(upstream, layers.sigmoid_forward(x))

        def objective():
            return float((layers.sigmoid_forward(x) * upstream).sum())

        assert_gradients_close(grad, numeric_gradient(objective, x))

    def test_sigmoid_slope_at_zero(self):
        y = layers.sigmoid_forward(np.zeros(1))
        assert layers.sigmoid_backward(np.ones(1), y)[0] == 0.25

    def test_dtype_preserved(self):
        x = np.linspace(-1, 1, 8, dtype=np.float32)
        assert layers.relu_forward(x).dtype == np.float32
        assert layers.sigmoid_forward(x).dtype == np.float32
