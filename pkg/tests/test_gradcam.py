"""Grad-CAM pipeline tests against hand arithmetic and the bilinear oracle."""

import numpy as np
import pytest

from modviz.autodiff import Tensor, backward
from modviz.autodiff import ops
from modviz.explain import (
    explain_gradcam,
    gradcam_alphas,
    gradcam_vector,
    normalize_unit,
    resize_bilinear,
)
from modviz.models import Network, TapError, format_features

from oracles import assert_gradients_close, bilinear_resize_reference, finite_difference_gradients


class TestAlphas:
    def test_all_ones_gradient_gives_alpha_one(self):
        grads = np.ones((3, 1, 4))
        maps = np.zeros((3, 1, 4))
        np.testing.assert_allclose(gradcam_alphas(maps, grads), 1.0)

    def test_linear_head_gives_unit_alphas(self):
        # score = sum of all feature map entries, so every gradient is 1
        maps_val = np.random.default_rng(0).normal(size=(5, 7))
        maps = Tensor(maps_val)
        backward(ops.tensor_sum(maps))
        alphas = gradcam_alphas(maps_val[:, None, :], maps.grad[:, None, :])
        np.testing.assert_allclose(alphas, 1.0)

    def test_alphas_match_finite_difference_means(self):
        # tiny net: score = sum(relu(maps) * coeffs), alphas = mean d score/d maps
        rng = np.random.default_rng(1)
        maps_val = rng.normal(size=(4, 6))
        coeffs = rng.normal(size=(4, 6))

        def score():
            return float((np.maximum(maps_val, 0) * coeffs).sum())

        maps = Tensor(maps_val)
        backward(ops.tensor_sum(ops.mul(ops.relu(maps), coeffs)))
        numeric = finite_difference_gradients(score, [maps_val])[0]
        assert_gradients_close([maps.grad], [numeric])
        np.testing.assert_allclose(
            gradcam_alphas(maps_val[:, None, :], maps.grad[:, None, :]),
            numeric.mean(axis=1),
            rtol=1e-4,
        )

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="disagree"):
            gradcam_alphas(np.zeros((2, 1, 4)), np.zeros((2, 1, 5)))


class TestVector:
    def test_relu_of_single_map(self):
        out = gradcam_vector(np.array([[1.0, -2.0, 3.0]]), np.array([1.0]))
        np.testing.assert_allclose(out, [1.0, 0.0, 3.0])

    def test_zero_alphas_give_zero_vector(self):
        out = gradcam_vector(np.random.default_rng(0).normal(size=(4, 8)), np.zeros(4))
        np.testing.assert_allclose(out, 0.0)

    def test_two_map_hand_arithmetic(self):
        maps = np.array([[1.0, 1.0], [3.0, 0.0]])
        out = gradcam_vector(maps, np.array([2.0, -1.0]))
        np.testing.assert_allclose(out, [0.0, 2.0])


class TestNormalize:
    def test_divide_by_max(self):
        np.testing.assert_allclose(normalize_unit(np.array([1.0, 2.0, 3.0])), [1 / 3, 2 / 3, 1.0])

    def test_all_zero_passes_through(self):
        np.testing.assert_allclose(normalize_unit(np.zeros(2)), [0.0, 0.0])

    def test_single_positive_value(self):
        np.testing.assert_allclose(normalize_unit(np.array([5.0])), [1.0])

    def test_negative_input_is_contract_violation(self):
        with pytest.raises(ValueError, match="nonnegative"):
            normalize_unit(np.array([-0.1, 1.0]))


class TestResize:
    def test_two_to_four_exact_values(self):
        out = resize_bilinear(np.array([0.0, 1.0]), 4)
        np.testing.assert_allclose(out, [0.0, 0.25, 0.75, 1.0], atol=1e-9)

    def test_identity_when_lengths_match(self):
        v = np.random.default_rng(0).uniform(size=32)
        np.testing.assert_array_equal(resize_bilinear(v, 32), v)

    def test_constant_stays_constant(self):
        for target in (1, 3, 50, 128):
            np.testing.assert_allclose(resize_bilinear(np.full(7, 2.5), target), 2.5)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_reference_implementation(self, seed):
        rng = np.random.default_rng(seed)
        src = rng.integers(1, 200)
        dst = rng.integers(1, 200)
        v = rng.uniform(size=src)
        np.testing.assert_allclose(
            resize_bilinear(v, dst), bilinear_resize_reference(v, dst), atol=1e-6
        )

    def test_monotone_between_knots(self):
        out = resize_bilinear(np.array([0.0, 1.0, 0.5]), 30)
        rising = out[:10]
        assert np.all(np.diff(rising) >= -1e-12)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            resize_bilinear(np.array([]), 4)


class TestExplain:
    @staticmethod
    def _sample(n_x=128, seed=0):
        rng = np.random.default_rng(seed)
        return (rng.normal(size=n_x) + 1j * rng.normal(size=n_x)).astype(np.complex64)

    def test_lenet_full_length_tap(self):
        net = Network.build("lenet", 128, 11, "iq", seed=1)
        cav = explain_gradcam(net, self._sample())
        assert cav.w.shape == (128,)
        assert cav.pre_resize_length == 128
        assert cav.method == "gradcam"
        assert 0.0 <= cav.w.min() and cav.w.max() <= 1.0

    def test_resnet_tap_resized_from_32(self):
        net = Network.build("resnet", 128, 11, "iq", seed=1)
        cav = explain_gradcam(net, self._sample())
        assert cav.pre_resize_length == 32
        assert cav.w.shape == (128,)

    def test_max_weight_is_one_unless_all_zero(self):
        net = Network.build("lenet", 128, 11, "iq", seed=2)
        cav = explain_gradcam(net, self._sample(seed=3))
        if np.any(cav.w > 0):
            assert cav.w.max() == pytest.approx(1.0, abs=1e-12)

    def test_positive_scale_invariance_of_w(self):
        # scaling every logit by c > 0 scales the target score and all tap
        # gradients by c, which cancels in the divide-by-max normalization
        net = Network.build("lenet", 64, 11, "iq", seed=4)
        sample = self._sample(64, seed=5)
        base = explain_gradcam(net, sample)
        scaled = Network(net.spec, net.clone_params())
        scaled.params["dense3.weight"].data *= 7.0
        scaled.params["dense3.bias"].data *= 7.0
        again = explain_gradcam(scaled, sample, target_class=base.target_class)
        np.testing.assert_allclose(again.w, base.w, atol=1e-6)

    def test_single_map_linear_head_proportional_to_map(self):
        # one feature map and an identity-ish head: w is the normalized ReLU of the map
        net = Network.build("lenet", 16, 2, "iq", seed=6, conv1_kernels=4,
                            conv2_kernels=1, dense1=8, dense2=4)
        sample = self._sample(16, seed=7)
        features = format_features(sample[None], "iq")
        logits, tap = net.forward_graph(Tensor(features), want_tap=True)
        cav = explain_gradcam(net, sample)
        score_grad_sign = gradcam_alphas(tap.data[0][:, None, :], _tap_grad(net, features, cav.target_class))
        expected = np.maximum(score_grad_sign[0] * tap.data[0, 0], 0.0)
        peak = expected.max()
        if peak > 0:
            np.testing.assert_allclose(cav.w, expected / peak, atol=1e-6)

    def test_lstm_has_no_tap(self):
        net = Network.build("lstm", 32, 11, "ap", seed=0)
        with pytest.raises(TapError, match="no tap point"):
            explain_gradcam(net, self._sample(32))


def _tap_grad(net, features, j_star):
    logits, tap = net.forward_graph(Tensor(features), want_tap=True)
    backward(ops.tensor_sum(ops.take_along_batch(logits, np.array([j_star]))))
    return tap.grad[0][:, None, :]
