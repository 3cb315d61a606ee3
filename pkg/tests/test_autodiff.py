"""Gradient and contract tests for the autodiff engine."""

import numpy as np
import pytest

from modviz.autodiff import Adam, NonFiniteGradientError, Tensor, backward
from modviz.autodiff import ops

from oracles import assert_gradients_close, finite_difference_gradients

FD_STEP = 1e-5


def _proj_loss(out: Tensor, weights: np.ndarray) -> Tensor:
    """Scalar projection of an op output, giving a fixed cotangent for FD checks."""
    return ops.tensor_sum(ops.mul(out, weights))


class TestScalarRules:
    def test_square(self):
        x = Tensor(np.asarray(3.0))
        y = ops.mul(x, x)
        backward(y)
        assert x.grad == pytest.approx(6.0)

    def test_product(self):
        x = Tensor(np.asarray(2.0))
        y = Tensor(np.asarray(5.0))
        backward(ops.mul(x, y))
        assert x.grad == pytest.approx(5.0)
        assert y.grad == pytest.approx(2.0)

    def test_double_use_accumulates(self):
        # f(x) = x*x + x has gradient 2x + 1
        x = Tensor(np.asarray(4.0))
        backward(ops.add(ops.mul(x, x), x))
        assert x.grad == pytest.approx(9.0)

    def test_backward_rejects_non_scalar(self):
        x = Tensor(np.ones(3))
        with pytest.raises(ValueError, match="scalar"):
            backward(ops.mul(x, 2.0))

    def test_backward_visits_each_node_once(self):
        calls = []
        x = Tensor(np.asarray(1.5))
        y = ops.mul(x, x)
        original = y.backward_rule
        y.backward_rule = lambda g: (calls.append(1), original(g))[1]
        z = ops.add(y, y)
        backward(z)
        assert len(calls) == 1
        assert x.grad == pytest.approx(2 * 2 * 1.5)


class TestConv1d:
    def test_valid_hand_example(self):
        x = Tensor(np.array([[[1.0, 2.0, 3.0]]]))
        k = Tensor(np.array([[[1.0, 0.0, -1.0]]]))
        b = Tensor(np.zeros(1))
        out = ops.conv1d(x, k, b, padding="valid")
        np.testing.assert_allclose(out.data, [[[-2.0]]])

    def test_identity_kernel(self):
        rng = np.random.default_rng(0)
        x = Tensor(rng.normal(size=(2, 1, 9)))
        k = Tensor(np.ones((1, 1, 1)))
        b = Tensor(np.zeros(1))
        out = ops.conv1d(x, k, b, padding="same")
        np.testing.assert_allclose(out.data, x.data)

    def test_same_padding_keeps_length(self):
        x = Tensor(np.random.default_rng(1).normal(size=(3, 2, 17)))
        k = Tensor(np.random.default_rng(2).normal(size=(5, 2, 3)))
        b = Tensor(np.zeros(5))
        assert ops.conv1d(x, k, b, padding="same").shape == (3, 5, 17)

    def test_channel_mismatch_raises(self):
        x = Tensor(np.zeros((1, 2, 8)))
        k = Tensor(np.zeros((4, 3, 3)))
        with pytest.raises(ValueError, match="channels"):
            ops.conv1d(x, k, Tensor(np.zeros(4)))

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("padding", ["same", "valid"])
    def test_gradients_match_finite_differences(self, seed, padding):
        rng = np.random.default_rng(seed)
        x_val = rng.normal(size=(2, 4, 32))
        k_val = rng.normal(size=(8, 4, 3))
        b_val = rng.normal(size=8)
        out_shape = ops.conv1d(
            Tensor(x_val), Tensor(k_val), Tensor(b_val), padding=padding
        ).shape
        proj = rng.normal(size=out_shape)

        def f():
            out = ops.conv1d(Tensor(x_val), Tensor(k_val), Tensor(b_val), padding=padding)
            return float((out.data * proj).sum())

        x = Tensor(x_val)
        k = Tensor(k_val)
        b = Tensor(b_val)
        backward(_proj_loss(ops.conv1d(x, k, b, padding=padding), proj))
        numeric = finite_difference_gradients(f, [x_val, k_val, b_val], FD_STEP)
        assert_gradients_close([x.grad, k.grad, b.grad], numeric)


class TestDenseReluPool:
    def test_relu_values(self):
        x = Tensor(np.array([-2.0, 3.0]))
        np.testing.assert_allclose(ops.relu(x).data, [0.0, 3.0])

    def test_maxpool_values_and_routing(self):
        x = Tensor(np.array([[[1.0, 5.0, 2.0, 4.0]]]))
        out = ops.maxpool1d(x, width=2, stride=2)
        np.testing.assert_allclose(out.data, [[[5.0, 4.0]]])
        backward(ops.tensor_sum(out))
        np.testing.assert_allclose(x.grad, [[[0.0, 1.0, 0.0, 1.0]]])

    @pytest.mark.parametrize("seed", range(3))
    def test_dense_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x_val = rng.normal(size=(4, 6))
        w_val = rng.normal(size=(6, 5))
        b_val = rng.normal(size=5)
        proj = rng.normal(size=(4, 5))

        def f():
            return float(((x_val @ w_val + b_val) * proj).sum())

        x, w, b = Tensor(x_val), Tensor(w_val), Tensor(b_val)
        backward(_proj_loss(ops.dense(x, w, b), proj))
        numeric = finite_difference_gradients(f, [x_val, w_val, b_val], FD_STEP)
        assert_gradients_close([x.grad, w.grad, b.grad], numeric)

    @pytest.mark.parametrize("seed", range(3))
    def test_maxpool_gradients(self, seed):
        rng = np.random.default_rng(seed)
        # spread values so the finite-difference step cannot flip an argmax
        x_val = rng.permutation(np.arange(2 * 3 * 12, dtype=float)).reshape(2, 3, 12) * 0.1
        proj = rng.normal(size=(2, 3, 6))

        def f():
            out = ops.maxpool1d(Tensor(x_val), width=2, stride=2)
            return float((out.data * proj).sum())

        x = Tensor(x_val)
        backward(_proj_loss(ops.maxpool1d(x, 2, 2), proj))
        numeric = finite_difference_gradients(f, [x_val], FD_STEP)
        assert_gradients_close([x.grad], numeric)

    @pytest.mark.parametrize("seed", range(3))
    def test_relu_gradients_away_from_kink(self, seed):
        rng = np.random.default_rng(seed)
        x_val = rng.normal(size=(5, 7))
        x_val[np.abs(x_val) < 1e-2] += 0.1
        proj = rng.normal(size=(5, 7))

        def f():
            return float((np.maximum(x_val, 0) * proj).sum())

        x = Tensor(x_val)
        backward(_proj_loss(ops.relu(x), proj))
        assert_gradients_close([x.grad], finite_difference_gradients(f, [x_val], FD_STEP))


class TestDropout:
    def test_inference_is_identity_object(self):
        x = Tensor(np.random.default_rng(0).normal(size=(3, 4)))
        assert ops.dropout(x, 0.5, None, train=False) is x

    def test_training_uses_inverted_scaling(self):
        rng = np.random.default_rng(7)
        x = Tensor(np.ones((2000,)))
        out = ops.dropout(x, 0.25, rng, train=True)
        kept = out.data[out.data > 0]
        np.testing.assert_allclose(kept, 1.0 / 0.75)
        assert abs(out.data.mean() - 1.0) < 0.05

    def test_bad_rate_rejected(self):
        with pytest.raises(ValueError, match="rate"):
            ops.dropout(Tensor(np.ones(3)), 1.0, np.random.default_rng(0), train=True)


class TestSoftmaxXent:
    def test_uniform_logits_loss_is_log_n(self):
        logits = Tensor(np.zeros((1, 11)))
        loss = ops.softmax_xent(logits, np.array([4]))
        assert loss.item() == pytest.approx(np.log(11.0), abs=1e-12)

    def test_softmax_is_probability_vector(self):
        rng = np.random.default_rng(3)
        s = ops.softmax(Tensor(rng.normal(size=(6, 11)) * 3)).data
        assert (s >= 0).all()
        np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-6)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError, match="label"):
            ops.softmax_xent(Tensor(np.zeros((1, 4))), np.array([4]))

    @pytest.mark.parametrize("seed", range(3))
    def test_xent_gradients(self, seed):
        rng = np.random.default_rng(seed)
        z_val = rng.normal(size=(5, 7))
        labels = rng.integers(0, 7, size=5)

        def f():
            z = z_val - z_val.max(axis=1, keepdims=True)
            logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
            return float(-logp[np.arange(5), labels].mean())

        z = Tensor(z_val)
        backward(ops.softmax_xent(z, labels))
        assert_gradients_close([z.grad], finite_difference_gradients(f, [z_val], FD_STEP))

    @pytest.mark.parametrize("seed", range(3))
    def test_softmax_pick_gradients(self, seed):
        rng = np.random.default_rng(seed)
        z_val = rng.normal(size=(4, 6))
        idx = rng.integers(0, 6, size=4)

        def f():
            z = z_val - z_val.max(axis=1, keepdims=True)
            e = np.exp(z)
            s = e / e.sum(axis=1, keepdims=True)
            return float(s[np.arange(4), idx].sum())

        z = Tensor(z_val)
        backward(ops.tensor_sum(ops.take_along_batch(ops.softmax(z), idx)))
        assert_gradients_close([z.grad], finite_difference_gradients(f, [z_val], FD_STEP))


class TestLstmLayer:
    @staticmethod
    def _params(rng, dim, hidden, dtype=np.float64):
        w_x = rng.normal(size=(dim, 4 * hidden)).astype(dtype) * 0.4
        w_h = rng.normal(size=(hidden, 4 * hidden)).astype(dtype) * 0.4
        b = rng.normal(size=4 * hidden).astype(dtype) * 0.1
        return w_x, w_h, b

    def test_zero_weights_give_zero_hidden(self):
        x = Tensor(np.random.default_rng(0).normal(size=(2, 6, 3)))
        h = ops.lstm_layer(x, Tensor(np.zeros((3, 16))), Tensor(np.zeros((4, 16))), Tensor(np.zeros(16)))
        np.testing.assert_allclose(h.data, 0.0)

    def test_single_step_matches_closed_form(self):
        rng = np.random.default_rng(1)
        dim, hidden = 3, 4
        w_x, w_h, b = self._params(rng, dim, hidden)
        x_val = rng.normal(size=(1, 1, dim))
        h = ops.lstm_layer(Tensor(x_val), Tensor(w_x), Tensor(w_h), Tensor(b)).data

        z = x_val[0, 0] @ w_x + b
        sig = lambda v: 1.0 / (1.0 + np.exp(-v))
        i, f, g, o = sig(z[:4]), sig(z[4:8]), np.tanh(z[8:12]), sig(z[12:])
        c = i * g
        np.testing.assert_allclose(h[0, 0], o * np.tanh(c), atol=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_gradients_match_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        batch, steps, dim, hidden = 2, 8, 2, 4
        w_x, w_h, b = self._params(rng, dim, hidden)
        x_val = rng.normal(size=(batch, steps, dim))
        proj = rng.normal(size=(batch, steps, hidden))

        def f():
            out = ops.lstm_layer(Tensor(x_val), Tensor(w_x), Tensor(w_h), Tensor(b))
            return float((out.data * proj).sum())

        x, wx, wh, bb = Tensor(x_val), Tensor(w_x), Tensor(w_h), Tensor(b)
        backward(_proj_loss(ops.lstm_layer(x, wx, wh, bb), proj))
        numeric = finite_difference_gradients(f, [x_val, w_x, w_h, b], FD_STEP)
        assert_gradients_close([x.grad, wx.grad, wh.grad, bb.grad], numeric, rel_tol=1e-4)

    def test_shape_mismatch_raises(self):
        x = Tensor(np.zeros((1, 4, 3)))
        with pytest.raises(ValueError, match="mismatch"):
            ops.lstm_layer(x, Tensor(np.zeros((2, 16))), Tensor(np.zeros((4, 16))), Tensor(np.zeros(16)))


class TestElementwiseGraph:
    """Covers the arithmetic used by the mask objective."""

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_abs_power_sum_gradients(self, p):
        rng = np.random.default_rng(int(p))
        w_val = rng.uniform(0.05, 0.95, size=12)

        def f():
            d = np.diff(w_val)
            return float(np.sum(np.abs(d) ** p) + 0.3 * np.sum(np.abs(w_val)))

        w = Tensor(w_val)
        diff = ops.sub(w[1:], w[:-1])
        loss = ops.add(
            ops.tensor_sum(ops.power(ops.absolute(diff), p)),
            ops.mul(ops.tensor_sum(ops.absolute(w)), 0.3),
        )
        backward(loss)
        assert_gradients_close([w.grad], finite_difference_gradients(f, [w_val], FD_STEP), rel_tol=1e-3)

    def test_broadcast_mul_unbroadcasts_grad(self):
        w = Tensor(np.array([0.25, 0.5]))
        x_const = np.arange(6.0).reshape(1, 2, 3)
        out = ops.mul(ops.reshape(w, (1, 2, 1)), x_const)
        backward(ops.tensor_sum(out))
        np.testing.assert_allclose(w.grad, x_const.sum(axis=(0, 2)))


class TestAdam:
    def test_first_step_closed_form(self):
        p = Tensor(np.asarray(1.0))
        opt = Adam({"x": p}, lr=0.001)
        p.grad = np.asarray(4.0)
        opt.step()
        assert p.data == pytest.approx(1.0 - 0.001 * 4.0 / (np.sqrt(16.0) + 1e-8), abs=1e-9)

    def test_zero_gradient_leaves_params(self):
        p = Tensor(np.ones(5))
        opt = Adam({"x": p})
        opt.step()
        np.testing.assert_allclose(p.data, 1.0)

    def test_quadratic_convergence(self):
        p = Tensor(np.asarray(4.0))
        opt = Adam({"x": p}, lr=0.05)
        for _ in range(200):
            p.grad = np.asarray(2.0 * (p.data - 2.0))
            opt.step()
        assert abs(float(p.data) - 2.0) < 0.05

    def test_non_finite_gradient_names_parameter(self):
        p = Tensor(np.ones(2))
        opt = Adam({"conv1.kernel": p})
        p.grad = np.array([1.0, np.nan])
        with pytest.raises(NonFiniteGradientError, match="conv1.kernel"):
            opt.step()


def test_fixed_seed_training_is_bitwise_deterministic():
    def run():
        rng = np.random.default_rng(99)
        w = Tensor(rng.normal(size=(3, 2)).astype(np.float32))
        b = Tensor(np.zeros(2, dtype=np.float32))
        opt = Adam({"w": w, "b": b}, lr=0.01)
        data_rng = np.random.default_rng(5)
        for _ in range(20):
            x = Tensor(data_rng.normal(size=(4, 3)).astype(np.float32))
            labels = data_rng.integers(0, 2, size=4)
            opt.zero_grad()
            backward(ops.softmax_xent(ops.dense(x, w, b), labels))
            opt.step()
        return w.data.tobytes(), b.data.tobytes()

    assert run() == run()
