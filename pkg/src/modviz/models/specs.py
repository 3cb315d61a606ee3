"""Classifier architectures with named feature-map tap points.

Three architectures share the (B, 2, n_x) channels-first input produced by
the format adapters: a two-conv LeNet-style CNN, a three-stack residual CNN
whose max-pools sit outside the stacks so the third stack's full-length
feature maps stay observable, and a two-layer LSTM that consumes the same
array transposed to time-major order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor
from ..autodiff import ops

ARCH_LENET = "lenet-v1"
ARCH_RESNET = "resnet-v1"
ARCH_LSTM = "lstm-v1"
FORMATS = ("iq", "ap")

LENET_HYPER = {"conv1_kernels": 64, "conv2_kernels": 80, "kernel_width": 3,
               "dense1": 256, "dense2": 128, "dropout": 0.5}
RESNET_HYPER = {"channels": 32, "kernel_width": 3, "dense1": 128, "dense2": 128,
                "dropout": 0.25}
LSTM_HYPER = {"hidden": 128, "dense": 32, "dropout": 0.5}


class TapError(ValueError):
    """Feature-map taps were requested from a model that has none."""


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description: id, input format, sizes, and tap point."""

    arch: str
    input_format: str
    n_x: int
    n_y: int
    hyper: dict = field(default_factory=dict)
    tap: str | None = None
    tap_maps: int = 0  # feature-map count N_f at the tap
    tap_length: int = 0  # feature-map height V at the tap


def build_lenet(n_x: int, n_y: int, input_format: str = "iq", **overrides) -> ModelSpec:
    """Two conv layers (64 then 80 kernels, width 3, same padding) and three
    dense layers; the tap is the post-ReLU output of conv2, 80 maps of 1 x n_x."""
    if n_x < 8:
        raise ValueError(f"LeNet needs n_x >= 8, got {n_x}")
    hyper = _merged(LENET_HYPER, overrides)
    return ModelSpec(ARCH_LENET, _checked_format(input_format), n_x, n_y, hyper,
                     tap="conv2.relu", tap_maps=hyper["conv2_kernels"], tap_length=n_x)


def build_resnet(n_x: int, n_y: int, input_format: str = "iq", **overrides) -> ModelSpec:
    """Three residual stacks (1x1 lead-in conv plus two two-conv identity
    units each, 5 convs per stack) with the width-2 max-pool placed after
    each stack; the tap is the third stack's output before its pool."""
    if n_x % 8 != 0:
        raise ValueError(f"ResNet needs n_x divisible by 8, got {n_x}")
    hyper = _merged(RESNET_HYPER, overrides)
    return ModelSpec(ARCH_RESNET, _checked_format(input_format), n_x, n_y, hyper,
                     tap="stack3.out", tap_maps=hyper["channels"], tap_length=n_x // 4)


def build_lstm(n_x: int, n_y: int, input_format: str = "ap", **overrides) -> ModelSpec:
    """Two stacked LSTM layers; the final hidden state feeds a small dense
    head.  No tap point: recurrent features are explained by masking."""
    hyper = _merged(LSTM_HYPER, overrides)
    return ModelSpec(ARCH_LSTM, _checked_format(input_format), n_x, n_y, hyper,
                     tap=None)


_BUILDERS = {ARCH_LENET: build_lenet, ARCH_RESNET: build_resnet, ARCH_LSTM: build_lstm}


def build_spec(arch: str, n_x: int, n_y: int, input_format: str, **overrides) -> ModelSpec:
    key = arch if arch in _BUILDERS else f"{arch}-v1"
    if key not in _BUILDERS:
        raise ValueError(f"unknown architecture {arch!r}")
    return _BUILDERS[key](n_x, n_y, input_format=input_format, **overrides)


def _checked_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"input format must be one of {FORMATS}, got {fmt!r}")
    return fmt


def _merged(defaults: dict, overrides: dict) -> dict:
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise ValueError(f"unknown hyperparameters: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(overrides)
    return merged


# ---------------------------------------------------------------------------
# parameter initialization
# ---------------------------------------------------------------------------

def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def _conv_init(rng, c_out, c_in, width, dtype):
    return _glorot(rng, (c_out, c_in, width), c_in * width, c_out * width, dtype)


def _dense_init(rng, d_in, d_out, dtype):
    return _glorot(rng, (d_in, d_out), d_in, d_out, dtype)


def _lstm_init(rng, d_in, hidden, dtype):
    """Uniform +-1/sqrt(H) gate weights; zero bias except forget gate at +1."""
    limit = 1.0 / np.sqrt(hidden)
    w_x = rng.uniform(-limit, limit, size=(d_in, 4 * hidden)).astype(dtype)
    w_h = rng.uniform(-limit, limit, size=(hidden, 4 * hidden)).astype(dtype)
    b = np.zeros(4 * hidden, dtype=dtype)
    b[hidden : 2 * hidden] = 1.0
    return w_x, w_h, b


def init_params(spec: ModelSpec, seed: int, dtype=np.float32) -> dict[str, Tensor]:
    """Fresh parameter tensors; the draw order is fixed by the layer list."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xC0DE)))
    h = spec.hyper
    params: dict[str, np.ndarray] = {}
    if spec.arch == ARCH_LENET:
        k = h["kernel_width"]
        params["conv1.kernel"] = _conv_init(rng, h["conv1_kernels"], 2, k, dtype)
        params["conv1.bias"] = np.zeros(h["conv1_kernels"], dtype=dtype)
        params["conv2.kernel"] = _conv_init(rng, h["conv2_kernels"], h["conv1_kernels"], k, dtype)
        params["conv2.bias"] = np.zeros(h["conv2_kernels"], dtype=dtype)
        flat = h["conv2_kernels"] * spec.n_x
        params["dense1.weight"] = _dense_init(rng, flat, h["dense1"], dtype)
        params["dense1.bias"] = np.zeros(h["dense1"], dtype=dtype)
        params["dense2.weight"] = _dense_init(rng, h["dense1"], h["dense2"], dtype)
        params["dense2.bias"] = np.zeros(h["dense2"], dtype=dtype)
        params["dense3.weight"] = _dense_init(rng, h["dense2"], spec.n_y, dtype)
        params["dense3.bias"] = np.zeros(spec.n_y, dtype=dtype)
    elif spec.arch == ARCH_RESNET:
        ch, k = h["channels"], h["kernel_width"]
        c_in = 2
        for s in (1, 2, 3):
            params[f"stack{s}.lead.kernel"] = _conv_init(rng, ch, c_in, 1, dtype)
            params[f"stack{s}.lead.bias"] = np.zeros(ch, dtype=dtype)
            for u in (1, 2):
                for c in (1, 2):
                    params[f"stack{s}.unit{u}.conv{c}.kernel"] = _conv_init(rng, ch, ch, k, dtype)
                    params[f"stack{s}.unit{u}.conv{c}.bias"] = np.zeros(ch, dtype=dtype)
            c_in = ch
        flat = ch * (spec.n_x // 8)
        params["dense1.weight"] = _dense_init(rng, flat, h["dense1"], dtype)
        params["dense1.bias"] = np.zeros(h["dense1"], dtype=dtype)
        params["dense2.weight"] = _dense_init(rng, h["dense1"], h["dense2"], dtype)
        params["dense2.bias"] = np.zeros(h["dense2"], dtype=dtype)
        params["dense3.weight"] = _dense_init(rng, h["dense2"], spec.n_y, dtype)
        params["dense3.bias"] = np.zeros(spec.n_y, dtype=dtype)
    elif spec.arch == ARCH_LSTM:
        hidden = h["hidden"]
        for layer, d_in in (("lstm1", 2), ("lstm2", hidden)):
            w_x, w_h, b = _lstm_init(rng, d_in, hidden, dtype)
            params[f"{layer}.w_x"] = w_x
            params[f"{layer}.w_h"] = w_h
            params[f"{layer}.bias"] = b
        params["dense1.weight"] = _dense_init(rng, hidden, h["dense"], dtype)
        params["dense1.bias"] = np.zeros(h["dense"], dtype=dtype)
        params["dense2.weight"] = _dense_init(rng, h["dense"], spec.n_y, dtype)
        params["dense2.bias"] = np.zeros(spec.n_y, dtype=dtype)
    else:
        raise ValueError(f"unknown architecture {spec.arch!r}")
    return {name: Tensor(value, name=name) for name, value in params.items()}


# ---------------------------------------------------------------------------
# forward passes
# ---------------------------------------------------------------------------

def forward_graph(
    spec: ModelSpec,
    params: dict[str, Tensor],
    x: Tensor,
    train: bool = False,
    rng: np.random.Generator | None = None,
    want_tap: bool = False,
) -> tuple[Tensor, Tensor | None]:
    """Build the classifier graph on an input tensor of shape (B, 2, n_x).

    Returns pre-softmax logits of shape (B, n_y) and, when requested, the
    tapped feature maps (B, N_f, V).
    """
    if want_tap and spec.tap is None:
        raise TapError("no tap point")
    if spec.arch == ARCH_LENET:
        return _lenet_forward(spec, params, x, train, rng, want_tap)
    if spec.arch == ARCH_RESNET:
        return _resnet_forward(spec, params, x, train, rng, want_tap)
    if spec.arch == ARCH_LSTM:
        return _lstm_forward(spec, params, x, train, rng), None
    raise ValueError(f"unknown architecture {spec.arch!r}")


def _lenet_forward(spec, params, x, train, rng, want_tap):
    rate = spec.hyper["dropout"]
    h = ops.relu(ops.conv1d(x, params["conv1.kernel"], params["conv1.bias"], "same"))
    h = ops.dropout(h, rate, rng, train)
    tap = ops.relu(ops.conv1d(h, params["conv2.kernel"], params["conv2.bias"], "same"))
    _check_tap_shape(spec, tap)
    h = ops.reshape(tap, (tap.shape[0], tap.shape[1] * tap.shape[2]))
    h = ops.dropout(ops.relu(ops.dense(h, params["dense1.weight"], params["dense1.bias"])), rate, rng, train)
    h = ops.relu(ops.dense(h, params["dense2.weight"], params["dense2.bias"]))
    logits = ops.dense(h, params["dense3.weight"], params["dense3.bias"])
    return logits, (tap if want_tap else None)


def _residual_unit(params, prefix, x):
    inner = ops.relu(ops.conv1d(x, params[f"{prefix}.conv1.kernel"], params[f"{prefix}.conv1.bias"], "same"))
    inner = ops.conv1d(inner, params[f"{prefix}.conv2.kernel"], params[f"{prefix}.conv2.bias"], "same")
    return ops.add(x, inner)


def _resnet_forward(spec, params, x, train, rng, want_tap):
    h = x
    tap = None
    for s in (1, 2, 3):
        h = ops.conv1d(h, params[f"stack{s}.lead.kernel"], params[f"stack{s}.lead.bias"], "same")
        h = _residual_unit(params, f"stack{s}.unit1", h)
        h = _residual_unit(params, f"stack{s}.unit2", h)
        if s == 3:
            tap = h
            _check_tap_shape(spec, tap)
        h = ops.maxpool1d(h, width=2, stride=2)
    rate = spec.hyper["dropout"]
    h = ops.reshape(h, (h.shape[0], h.shape[1] * h.shape[2]))
    h = ops.dropout(ops.relu(ops.dense(h, params["dense1.weight"], params["dense1.bias"])), rate, rng, train)
    h = ops.relu(ops.dense(h, params["dense2.weight"], params["dense2.bias"]))
    logits = ops.dense(h, params["dense3.weight"], params["dense3.bias"])
    return logits, (tap if want_tap else None)


def _lstm_forward(spec, params, x, train, rng):
    seq = ops.transpose(x, (0, 2, 1))  # (B, T, 2)
    seq = ops.lstm_layer(seq, params["lstm1.w_x"], params["lstm1.w_h"], params["lstm1.bias"])
    seq = ops.lstm_layer(seq, params["lstm2.w_x"], params["lstm2.w_h"], params["lstm2.bias"])
    last = seq[:, -1, :]
    last = ops.dropout(last, spec.hyper["dropout"], rng, train)
    h = ops.relu(ops.dense(last, params["dense1.weight"], params["dense1.bias"]))
    return ops.dense(h, params["dense2.weight"], params["dense2.bias"])


def _check_tap_shape(spec: ModelSpec, tap: Tensor) -> None:
    expected = (spec.tap_maps, spec.tap_length)
    if tap.shape[1:] != expected:
        raise AssertionError(f"tap shape {tap.shape[1:]} != expected {expected}")


def parameter_count(params: dict[str, Tensor]) -> int:
    return sum(p.size for p in params.values())
