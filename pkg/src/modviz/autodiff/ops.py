"""Differentiable operations over :class:`~modviz.autodiff.tensor.Tensor`.

Ops are layer-granular: each call records one graph node whose backward rule
is written by hand against the forward arithmetic.  Convolution runs through
an im2col buffer and the LSTM layer is a single fused node that backpropagates
through time internally, which keeps graph overhead negligible for batched
training.

Convolution uses cross-correlation semantics (no kernel flip).
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce ``grad`` back to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _const(value) -> np.ndarray:
    if isinstance(value, Tensor):
        raise TypeError("expected a constant, got a Tensor")
    return np.asarray(value)


# ---------------------------------------------------------------------------
# elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    if not isinstance(a, Tensor):
        a, b = b, a
    if isinstance(b, Tensor):
        out = Tensor(a.data + b.data, (a, b))

        def rule(g, a=a, b=b):
            a.grad += _unbroadcast(g, a.shape)
            b.grad += _unbroadcast(g, b.shape)

    else:
        c = _const(b)
        out = Tensor(a.data + c, (a,))

        def rule(g, a=a):
            a.grad += _unbroadcast(g, a.shape)

    out.backward_rule = rule
    return out


def mul(a, b) -> Tensor:
    if not isinstance(a, Tensor):
        a, b = b, a
    if isinstance(b, Tensor):
        out = Tensor(a.data * b.data, (a, b))

        def rule(g, a=a, b=b):
            a.grad += _unbroadcast(g * b.data, a.shape)
            b.grad += _unbroadcast(g * a.data, b.shape)

    else:
        c = _const(b)
        out = Tensor(a.data * c, (a,))

        def rule(g, a=a, c=c):
            a.grad += _unbroadcast(g * c, a.shape)

    out.backward_rule = rule
    return out


def neg(a: Tensor) -> Tensor:
    out = Tensor(-a.data, (a,))

    def rule(g, a=a):
        a.grad -= g

    out.backward_rule = rule
    return out


def sub(a, b):
    if isinstance(b, Tensor):
        return add(a, neg(b))
    return add(a, -_const(b))


def power(a: Tensor, exponent: float) -> Tensor:
    """Elementwise ``a ** exponent`` for a real constant exponent."""
    p = float(exponent)
    out = Tensor(a.data**p, (a,))

    def rule(g, a=a, p=p):
        a.grad += g * p * a.data ** (p - 1.0)

    out.backward_rule = rule
    return out


def absolute(a: Tensor) -> Tensor:
    out = Tensor(np.abs(a.data), (a,))

    def rule(g, a=a):
        a.grad += g * np.sign(a.data)

    out.backward_rule = rule
    return out


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.data, 0), (a,))

    def rule(g, a=a, mask=(a.data > 0)):
        a.grad += g * mask

    out.backward_rule = rule
    return out


# ---------------------------------------------------------------------------
# shape handling and reductions
# ---------------------------------------------------------------------------

def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape), (a,))

    def rule(g, a=a):
        a.grad += g.reshape(a.shape)

    out.backward_rule = rule
    return out


def transpose(a: Tensor, axes: tuple[int, ...]) -> Tensor:
    inverse = tuple(np.argsort(axes))
    out = Tensor(np.ascontiguousarray(a.data.transpose(axes)), (a,))

    def rule(g, a=a, inverse=inverse):
        a.grad += g.transpose(inverse)

    out.backward_rule = rule
    return out


def getitem(a: Tensor, key) -> Tensor:
    out = Tensor(np.ascontiguousarray(a.data[key]), (a,))

    def rule(g, a=a, key=key):
        a.grad[key] += g

    out.backward_rule = rule
    return out


def tensor_sum(a: Tensor) -> Tensor:
    out = Tensor(np.asarray(a.data.sum(), dtype=a.dtype), (a,))

    def rule(g, a=a):
        a.grad += g

    out.backward_rule = rule
    return out


def mean(a: Tensor) -> Tensor:
    return mul(tensor_sum(a), 1.0 / a.size)


# ---------------------------------------------------------------------------
# neural network layers
# ---------------------------------------------------------------------------

def dense(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Affine map ``x @ w + b`` for ``x`` of shape (B, D), ``w`` (D, H)."""
    out = Tensor(x.data @ w.data + b.data, (x, w, b))

    def rule(g, x=x, w=w, b=b):
        x.grad += g @ w.data.T
        w.grad += x.data.T @ g
        b.grad += g.sum(axis=0)

    out.backward_rule = rule
    return out


def _pad_amounts(length: int, width: int, padding: str) -> tuple[int, int]:
    if padding == "same":
        return (width - 1) // 2, width // 2
    if padding == "valid":
        return 0, 0
    raise ValueError(f"unknown padding mode {padding!r}")


def conv1d(x: Tensor, kernels: Tensor, bias: Tensor, padding: str = "same") -> Tensor:
    """1-D cross-correlation.

    ``x`` is (B, C_in, L), ``kernels`` (C_out, C_in, K), ``bias`` (C_out,).
    Stride is 1; ``padding`` is "same" (output length L) or "valid".
    """
    batch, c_in, length = x.shape
    c_out, c_in_k, width = kernels.shape
    if c_in_k != c_in:
        raise ValueError(f"kernel expects {c_in_k} input channels, input has {c_in}")
    left, right = _pad_amounts(length, width, padding)
    if width > length + left + right:
        raise ValueError(f"kernel width {width} exceeds padded input length {length + left + right}")

    if left or right:
        xp = np.pad(x.data, ((0, 0), (0, 0), (left, right)))
    else:
        xp = x.data
    out_len = xp.shape[2] - width + 1
    windows = np.lib.stride_tricks.sliding_window_view(xp, width, axis=2)
    cols = np.ascontiguousarray(windows.transpose(0, 2, 1, 3)).reshape(batch * out_len, c_in * width)
    w2 = kernels.data.reshape(c_out, c_in * width).T
    out_data = (cols @ w2 + bias.data).reshape(batch, out_len, c_out).transpose(0, 2, 1)
    out = Tensor(np.ascontiguousarray(out_data), (x, kernels, bias))

    def rule(g, x=x, kernels=kernels, bias=bias, cols=cols, w2=w2,
             dims=(batch, c_in, out_len, width, left)):
        batch, c_in, out_len, width, left = dims
        c_out = g.shape[1]
        g2 = np.ascontiguousarray(g.transpose(0, 2, 1)).reshape(batch * out_len, c_out)
        kernels.grad += (cols.T @ g2).T.reshape(kernels.shape)
        bias.grad += g2.sum(axis=0)
        dcols = (g2 @ w2.T).reshape(batch, out_len, c_in, width)
        dxp = np.zeros((batch, c_in, out_len + width - 1), dtype=g.dtype)
        for k in range(width):
            dxp[:, :, k : k + out_len] += dcols[:, :, :, k].transpose(0, 2, 1)
        x.grad += dxp[:, :, left : left + x.shape[2]]

    out.backward_rule = rule
    return out


def maxpool1d(x: Tensor, width: int, stride: int) -> Tensor:
    """Max pooling over the last axis of (B, C, L); records argmax for backward."""
    batch, channels, length = x.shape
    out_len = (length - width) // stride + 1
    if out_len < 1:
        raise ValueError(f"pool width {width} does not fit input length {length}")
    windows = np.lib.stride_tricks.sliding_window_view(x.data, width, axis=2)[:, :, ::stride]
    arg = windows.argmax(axis=3)
    out_data = np.take_along_axis(windows, arg[..., None], axis=3)[..., 0]
    out = Tensor(np.ascontiguousarray(out_data), (x,))
    positions = np.arange(out_len) * stride + arg  # (B, C, out_len) flat input index

    def rule(g, x=x, positions=positions):
        b_idx, c_idx = np.indices(positions.shape[:2])[:2]
        b_idx = np.broadcast_to(b_idx[..., None], positions.shape)
        c_idx = np.broadcast_to(c_idx[..., None], positions.shape)
        np.add.at(x.grad, (b_idx, c_idx, positions), g)

    out.backward_rule = rule
    return out


def dropout(x: Tensor, rate: float, rng: np.random.Generator | None, train: bool) -> Tensor:
    """Inverted dropout; the inference path returns ``x`` itself."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("training-mode dropout needs an rng")
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return mul(x, keep)


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis."""
    z = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(s, (x,))

    def rule(g, x=x, s=s):
        x.grad += s * (g - (g * s).sum(axis=-1, keepdims=True))

    out.backward_rule = rule
    return out


def softmax_xent(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy of softmax(logits) against integer ``labels``.

    ``logits`` is (B, N); each label must lie in [0, N).
    """
    labels = np.asarray(labels)
    if labels.ndim == 0:
        labels = labels[None]
    batch, n_classes = logits.shape
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError(f"label out of range for {n_classes} classes")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1, keepdims=True))
    log_probs = z - log_norm
    loss_val = -log_probs[np.arange(batch), labels].mean()
    out = Tensor(np.asarray(loss_val, dtype=logits.dtype), (logits,))

    def rule(g, logits=logits, labels=labels, log_probs=log_probs, batch=batch):
        probs = np.exp(log_probs)
        probs[np.arange(batch), labels] -= 1.0
        logits.grad += probs * (g / batch)

    out.backward_rule = rule
    return out


def take_along_batch(x: Tensor, indices: np.ndarray) -> Tensor:
    """Select ``x[b, indices[b]]`` for every row, giving a (B,) tensor."""
    indices = np.asarray(indices)
    rows = np.arange(x.shape[0])
    out = Tensor(x.data[rows, indices].copy(), (x,))

    def rule(g, x=x, rows=rows, indices=indices):
        np.add.at(x.grad, (rows, indices), g)

    out.backward_rule = rule
    return out


def lstm_layer(x: Tensor, w_x: Tensor, w_h: Tensor, b: Tensor) -> Tensor:
    """One LSTM layer over (B, T, D) input, returning all hidden states (B, T, H).

    Standard cell with sigmoid input/forget/output gates and tanh candidate;
    gate blocks are ordered i, f, g, o along the 4H axis.  Initial hidden and
    cell states are zero.  The whole layer is one graph node: forward caches
    per-step activations and the backward rule runs truncation-free BPTT.
    """
    batch, steps, dim = x.shape
    four_h = w_x.shape[1]
    hidden = four_h // 4
    if w_x.shape != (dim, four_h) or w_h.shape != (hidden, four_h) or b.shape != (four_h,):
        raise ValueError(
            f"LSTM weight shapes mismatch input: x (B,T,{dim}), "
            f"w_x {w_x.shape}, w_h {w_h.shape}, b {b.shape}"
        )
    dtype = x.dtype

    xw = x.data.reshape(batch * steps, dim) @ w_x.data
    xw = xw.reshape(batch, steps, four_h) + b.data

    gates = np.empty((steps, batch, four_h), dtype=dtype)
    c_prev_all = np.empty((steps, batch, hidden), dtype=dtype)
    tanh_c_all = np.empty((steps, batch, hidden), dtype=dtype)
    h_seq = np.empty((batch, steps, hidden), dtype=dtype)

    h = np.zeros((batch, hidden), dtype=dtype)
    c = np.zeros((batch, hidden), dtype=dtype)
    for t in range(steps):
        z = xw[:, t] + h @ w_h.data
        i = _sigmoid(z[:, :hidden])
        f = _sigmoid(z[:, hidden : 2 * hidden])
        g_cand = np.tanh(z[:, 2 * hidden : 3 * hidden])
        o = _sigmoid(z[:, 3 * hidden :])
        c_prev_all[t] = c
        c = f * c + i * g_cand
        tc = np.tanh(c)
        tanh_c_all[t] = tc
        h = o * tc
        h_seq[:, t] = h
        gates[t, :, :hidden] = i
        gates[t, :, hidden : 2 * hidden] = f
        gates[t, :, 2 * hidden : 3 * hidden] = g_cand
        gates[t, :, 3 * hidden :] = o

    out = Tensor(h_seq, (x, w_x, w_h, b))

    def rule(g_out, x=x, w_x=w_x, w_h=w_h, b=b, gates=gates,
             c_prev_all=c_prev_all, tanh_c_all=tanh_c_all, h_seq=h_seq,
             dims=(batch, steps, dim, hidden)):
        batch, steps, dim, hidden = dims
        dz_all = np.empty((batch, steps, 4 * hidden), dtype=g_out.dtype)
        dh_rec = np.zeros((batch, hidden), dtype=g_out.dtype)
        dc = np.zeros((batch, hidden), dtype=g_out.dtype)
        w_h_t = w_h.data.T
        for t in range(steps - 1, -1, -1):
            i = gates[t, :, :hidden]
            f = gates[t, :, hidden : 2 * hidden]
            g_cand = gates[t, :, 2 * hidden : 3 * hidden]
            o = gates[t, :, 3 * hidden :]
            tc = tanh_c_all[t]
            dh = g_out[:, t] + dh_rec
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            di = dc * g_cand
            dg = dc * i
            df = dc * c_prev_all[t]
            dz = dz_all[:, t]
            dz[:, :hidden] = di * i * (1.0 - i)
            dz[:, hidden : 2 * hidden] = df * f * (1.0 - f)
            dz[:, 2 * hidden : 3 * hidden] = dg * (1.0 - g_cand * g_cand)
            dz[:, 3 * hidden :] = do * o * (1.0 - o)
            dc = dc * f
            dh_rec = dz @ w_h_t

        dz2d = dz_all.reshape(batch * steps, 4 * hidden)
        x.grad += (dz2d @ w_x.data.T).reshape(batch, steps, dim)
        x2d = x.data.reshape(batch * steps, dim)
        w_x.grad += x2d.T @ dz2d
        # hidden states shifted one step back feed the recurrent matmul
        h_prev = np.zeros((batch, steps, hidden), dtype=g_out.dtype)
        h_prev[:, 1:] = h_seq[:, :-1]
        w_h.grad += h_prev.reshape(batch * steps, hidden).T @ dz2d
        b.grad += dz2d.sum(axis=0)

    out.backward_rule = rule
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
# operator bindings
# ---------------------------------------------------------------------------

def _install_operators() -> None:
    Tensor.__add__ = add
    Tensor.__radd__ = add
    Tensor.__mul__ = mul
    Tensor.__rmul__ = mul
    Tensor.__neg__ = neg
    Tensor.__sub__ = sub
    Tensor.__rsub__ = lambda a, b: add(neg(a), _const(b))
    Tensor.__pow__ = power
    Tensor.__getitem__ = getitem
    Tensor.sum = tensor_sum
    Tensor.mean = mean
    Tensor.reshape = reshape
    Tensor.transpose = transpose
    Tensor.relu = relu
    Tensor.abs = absolute


_install_operators()
