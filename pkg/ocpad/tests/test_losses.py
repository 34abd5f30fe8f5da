import numpy as np
import pytest

from ocpad.errors import DataContractError, UsageError
from ocpad.nn.losses import (
    batch_loss,
    ishii_wmse_batch,
    loss_and_grad,
    mse_batch,
    nearest_rank_quantile,
    pixel_errors,
    pixel_weights,
    proposed_wmse_batch,
    sample_score,
)
from ocpad.nn.network import ParamStore, Sequential
from ocpad.schemas.architecture import AEArchitecture
from ocpad.schemas.loss import LossConfig
from ocpad.services.autoencoder import plan
from ocpad.tests.conftest import assert_gradients_close, numeric_gradient

C_GRID = [0.0, 0.5, 1.0, 1.4, 1.8, 2.0, 2.2, 3.0]


def random_pair(rng, shape=(3, 2, 4, 5)):
    x = rng.uniform(0, 1, size=shape)
    return x, np.clip(x + rng.normal(scale=0.2, size=shape), 0, 1)


class TestQuantile:
    @pytest.mark.parametrize("alpha,expected", [(0.1, 1.0), (0.5, 5.0), (0.9, 9.0), (0.91, 10.0), (1.0, 10.0)])
    def test_nearest_rank(self, alpha, expected):
        values = np.arange(10, 0, -1, dtype=np.float64)
        assert nearest_rank_quantile(values, alpha) == expected

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
    def test_alpha_out_of_range(self, alpha):
        with pytest.raises(UsageError):
            nearest_rank_quantile(np.ones(3), alpha)


class TestLossIdentities:
    def test_zero_on_perfect_reconstruction(self):
        x = np.random.default_rng(0).uniform(size=(4, 3, 5, 6))
        for config in (LossConfig(kind="mse"), LossConfig(kind="ishii_wmse"), LossConfig(kind="proposed_wmse")):
            value, grad = loss_and_grad(x, x.copy(), config)
            assert value == 0.0
            assert not grad.any()

    def test_mse_of_known_errors(self):
        x = np.zeros((2, 1, 1, 2))
        x_rec = np.array([[[[1.0, 0.0]]], [[[2.0, 2.0]]]])
        assert mse_batch(x, x_rec) == pytest.approx((0.5 + 4.0) / 2)

    def test_ishii_drops_the_worst_samples(self):
        x = np.zeros((4, 1, 1, 1))
        x_rec = np.array([1.0, 2.0, 3.0, 4.0]).reshape(4, 1, 1, 1)
        # alpha = 0.5 keeps the two smallest errors; the denominator stays B.
        assert ishii_wmse_batch(x, x_rec, 0.5) == pytest.approx((1.0 + 4.0) / 4)

    def test_proposed_drops_outlier_pixels(self):
        x = np.zeros((1, 1, 1, 4))
        x_rec = np.array([0.1, 0.1, 0.1, 1.0]).reshape(1, 1, 1, 4)
        # mse + 1.0 * std falls between 0.01 and 1.0, so only the outlier goes.
        assert proposed_wmse_batch(x, x_rec, 1.0) == pytest.approx(0.03 / 4)

    def test_worked_examples(self):
        x = np.array([0.0, 2.0]).reshape(2, 1, 1, 1)
        assert mse_batch(x, np.ones_like(x)) == 1.0

        errors = np.sqrt([0.1, 0.2, 0.3, 1.0]).reshape(4, 1, 1, 1)
        assert ishii_wmse_batch(np.zeros_like(errors), errors, 0.75) == pytest.approx(0.15)

        # Squared pixel errors (1, 1, 1, 9): threshold 3 + sqrt(12) drops the last pixel.
        x_rec = np.array([1.0, 1.0, 1.0, 3.0]).reshape(1, 1, 1, 4)
        assert proposed_wmse_batch(np.zeros_like(x_rec), x_rec, 1.0) == pytest.approx(0.75)
        assert sample_score(np.zeros((1, 1, 4)), x_rec[0], LossConfig(kind="proposed_wmse", c=1.0)) \
            == pytest.approx(0.75)

    def test_properties_over_random_tensors(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            x, x_rec = random_pair(rng, (2, 1, 3, 4))
            mse = mse_batch(x, x_rec)
            assert ishii_wmse_batch(x, x_rec, 1.0) == mse
            values = [proposed_wmse_batch(x, x_rec, c) for c in C_GRID]
            assert all(v <= mse for v in values)
            assert all(a <= b for a, b in zip(values, values[1:]))

    def test_equal_to_mse_for_large_c(self):
        rng = np.random.default_rng(5)
        x, x_rec = random_pair(rng)
        errors = pixel_errors(x, x_rec)
        mses, stds = errors.mean(axis=1), errors.std(axis=1)
        c = float(((errors.max(axis=1) - mses) / stds).max())
        assert proposed_wmse_batch(x, x_rec, c + 1e-9) == mse_batch(x, x_rec)

    def test_constant_error_map_keeps_every_pixel(self):
        errors = np.full((2, 12), 0.1 ** 2)
        np.testing.assert_array_equal(pixel_weights(errors, 0.0), np.ones((2, 12)))

    def test_invalid_inputs(self):
        with pytest.raises(UsageError):
            pixel_weights(np.ones((1, 3)), -1.0)
        with pytest.raises(DataContractError):
            mse_batch(np.zeros((1, 2, 2, 2)), np.zeros((1, 2, 2, 3)))


class TestLossGradients:
    @pytest.mark.parametrize("seed", range(20))
    def test_mse(self, seed):
        rng = np.random.default_rng(seed)
        x, x_rec = random_pair(rng)
        config = LossConfig(kind="mse")
        _, grad = loss_and_grad(x, x_rec, config)
        assert_gradients_close(grad, numeric_gradient(lambda: batch_loss(x, x_rec, config), x_rec))

    @pytest.mark.parametrize("seed", range(20))
    def test_ishii(self, seed):
        rng = np.random.default_rng(seed)
        config = LossConfig(kind="ishii_wmse", alpha=0.5)
        while True:
            x, x_rec = random_pair(rng)
            mses = np.sort(pixel_errors(x, x_rec).mean(axis=1))
            if np.diff(mses).min() > 1e-4:
                break
        _, grad = loss_and_grad(x, x_rec, config)
        assert_gradients_close(grad, numeric_gradient(lambda: batch_loss(x, x_rec, config), x_rec))

    @pytest.mark.parametrize("c", [1.0, 1.8])
    @pytest.mark.parametrize("seed", range(20))
    def test_proposed(self, seed, c):
        rng = np.random.default_rng(seed)
        config = LossConfig(kind="proposed_wmse", c=c)
        while True:
            x, x_rec = random_pair(rng)
            errors = pixel_errors(x, x_rec)
            threshold = errors.mean(axis=1, keepdims=True) + c * errors.std(axis=1, keepdims=True)
            if np.abs(errors - threshold).min() > 1e-4:
                break
        _, grad = loss_and_grad(x, x_rec, config)
        assert_gradients_close(grad, numeric_gradient(lambda: batch_loss(x, x_rec, config), x_rec))

    def test_gradient_keeps_reconstruction_dtype(self):
        x = np.zeros((1, 1, 2, 2), np.float32)
        _, grad = loss_and_grad(x, np.full_like(x, 0.5), LossConfig())
        assert grad.dtype == np.float32


class TestSampleScore:
    def test_single_image_and_batch_of_one_agree(self):
        rng = np.random.default_rng(1)
        x, x_rec = random_pair(rng, (1, 3, 4, 5))
        config = LossConfig(kind="proposed_wmse", c=1.8)
        assert sample_score(x[0], x_rec[0], config) == sample_score(x, x_rec, config)

    def test_rejects_batches(self):
        x = np.zeros((2, 3, 4, 5))
        with pytest.raises(DataContractError):
            sample_score(x, x, LossConfig())


class TestBatchInvariance:
    @pytest.mark.parametrize("config", [LossConfig(kind="mse"), LossConfig(kind="proposed_wmse", c=1.0),
                                        LossConfig(kind="proposed_wmse", c=2.2)], ids=["mse", "wmse-1.0", "wmse-2.2"])
    @pytest.mark.parametrize("seed", range(20))
    def test_duplicating_the_batch(self, seed, config):
        rng = np.random.default_rng(seed)
        x, x_rec = random_pair(rng)
        doubled_x, doubled_rec = np.concatenate([x, x]), np.concatenate([x_rec, x_rec])
        value, grad = loss_and_grad(x, x_rec, config)
        doubled_value, doubled_grad = loss_and_grad(doubled_x, doubled_rec, config)
        assert doubled_value == pytest.approx(value, rel=1e-12)
        # Each copy carries half the weight of the original sample.
        np.testing.assert_allclose(doubled_grad[:len(x)], grad / 2, rtol=1e-12)
        np.testing.assert_allclose(doubled_grad[len(x):], grad / 2, rtol=1e-12)


class TestAutoencoderGradients:
    """Proposed wMSE backpropagated through whole small autoencoders."""

    ARCHS = {
        "conv_ae": AEArchitecture(kind="conv_ae", channels=2, height=4, width=6, filters=3),
        "dense_ae": AEArchitecture(kind="dense_ae", channels=2, height=4, width=6, filters=2, latent=4),
    }

    @pytest.mark.parametrize("c", [1.0, 1.8])
    @pytest.mark.parametrize("kind", ["conv_ae", "dense_ae"])
    @pytest.mark.parametrize("seed", range(5))
    def test_parameter_gradients(self, seed, kind, c):
        arch = self.ARCHS[kind]
        specs, _ = plan(arch)
        network = Sequential(specs, arch.input_shape)
        params = ParamStore.initialize(specs, arch.input_shape, seed=seed).astype(np.float64)
        config = LossConfig(kind="proposed_wmse", c=c)
        rng = np.random.default_rng(seed)
        while True:
            x = rng.uniform(0, 1, size=(3,) + arch.input_shape)
            out, caches = network.forward(params, x)
            errors = pixel_errors(x, out)
            threshold = errors.mean(axis=1, keepdims=True) + c * errors.std(axis=1, keepdims=True)
            # Keep the mask fixed under the finite-difference step.
            if np.abs(errors - threshold).min() > 1e-4:
                break
        _, grad_out = loss_and_grad(x, out, config)
        _, grads = network.backward(params, caches, grad_out, input_grad=False)

        def objective():
            return batch_loss(x, network.forward(params, x)[0], config)

        for index, entry in enumerate(params):
            for name in entry:
                assert_gradients_close(grads[index][name], numeric_gradient(objective, entry[name]))
