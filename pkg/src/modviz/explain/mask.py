"""Mask-optimization class activation vectors for the LSTM classifier.

The mask function blends each input point toward a constant deletion value,
Phi(x, w) = (1 - w) * x + xi * w, with one weight per sample point shared by
both channels.  The weights minimize the masked post-softmax probability of
the originally predicted class plus an L1 sparsity term and a powered
total-variation smoothness term, by projected Adam steps that clip every
iterate into [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Adam, Tensor, backward
from ..autodiff import ops
from ..models import Network, format_features
from ..signals import Dataset
from .gradcam import METHOD_MASK, ClassActivationVector


class MaskDivergedError(RuntimeError):
    def __init__(self, iteration: int):
        super().__init__(f"mask objective became non-finite at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class MaskConfig:
    xi: float = 0.01  # deletion value
    lambda1: float = 1e-4  # L1 weight
    lambda2: float = 1e-3  # total-variation weight
    p: float = 3.0  # TV norm order
    iterations: int = 500
    step_size: float = 0.05
    init_value: float = 0.5

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"TV order p must be >= 1, got {self.p}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("regularization weights must be nonnegative")
        if not np.isfinite(self.xi):
            raise ValueError("deletion value must be finite")
        if self.iterations < 1 or self.step_size <= 0:
            raise ValueError("iterations must be >= 1 and step_size positive")
        if not 0.0 <= self.init_value <= 1.0:
            raise ValueError("init_value must lie in [0, 1]")


@dataclass
class MaskTrace:
    """Objective components per evaluated iterate (index 0 is the init)."""

    objective: np.ndarray
    probability: np.ndarray
    l1: np.ndarray
    tv: np.ndarray
    best_index: int = 0

    def to_csv(self, path) -> None:
        lines = ["iteration,objective,probability,l1,tv"]
        for k in range(len(self.objective)):
            lines.append(
                f"{k},{float(self.objective[k])!r},{float(self.probability[k])!r},"
                f"{float(self.l1[k])!r},{float(self.tv[k])!r}"
            )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def apply_mask(x: np.ndarray, w: np.ndarray, xi: float = 0.01) -> np.ndarray:
    """Phi(x, w) on a point-major (N_x, 2) input; w broadcasts over channels."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError(f"expected (N_x, 2) input, got {x.shape}")
    if w.shape != (x.shape[0],):
        raise ValueError(f"mask length {w.shape} does not match input {x.shape}")
    return (1.0 - w)[:, None] * x + xi * w[:, None]


def _objective_graph(net: Network, features: np.ndarray, w: Tensor,
                     targets: np.ndarray, cfg: MaskConfig):
    """Build the batched objective graph.

    ``features`` is the constant (B, 2, n_x) model input, ``w`` a (B, n_x)
    tensor.  Returns the scalar loss tensor plus per-sample component arrays
    (probability, lambda-scaled L1, lambda-scaled TV).
    """
    batch, _, n_x = features.shape
    w_c = ops.reshape(w, (batch, 1, n_x))
    masked = ops.add(ops.mul(ops.sub(1.0, w_c), features), ops.mul(w_c, cfg.xi))
    logits, _ = net.forward_graph(masked, train=False)
    probs = ops.softmax(logits)
    prob_term = ops.take_along_batch(probs, targets)  # (B,)

    abs_w = ops.absolute(w)
    diff = ops.sub(w[:, 1:], w[:, :-1])
    tv_pow = ops.power(ops.absolute(diff), cfg.p)

    loss = ops.add(
        ops.tensor_sum(prob_term),
        ops.add(
            ops.mul(ops.tensor_sum(abs_w), cfg.lambda1),
            ops.mul(ops.tensor_sum(tv_pow), cfg.lambda2),
        ),
    )
    prob_vals = prob_term.data.astype(np.float64)
    l1_vals = cfg.lambda1 * np.abs(w.data).sum(axis=1).astype(np.float64)
    tv_vals = cfg.lambda2 * (np.abs(np.diff(w.data, axis=1)) ** cfg.p).sum(axis=1).astype(np.float64)
    return loss, prob_vals, l1_vals, tv_vals


def mask_objective(net: Network, x: np.ndarray, w: np.ndarray, cfg: MaskConfig,
                   target_class: int) -> tuple[float, dict[str, float]]:
    """Objective value and its three components for one point-major input."""
    features = np.ascontiguousarray(np.asarray(x, dtype=np.float64).T[None])
    w_t = Tensor(np.asarray(w, dtype=np.float64)[None, :])
    _, prob, l1, tv = _objective_graph(net, features, w_t, np.array([target_class]), cfg)
    total = float(prob[0] + l1[0] + tv[0])
    return total, {"probability": float(prob[0]), "l1": float(l1[0]), "tv": float(tv[0])}


def mask_objective_gradient(net: Network, x: np.ndarray, w: np.ndarray, cfg: MaskConfig,
                            target_class: int) -> tuple[float, np.ndarray]:
    """Objective and its gradient with respect to the mask weights."""
    features = np.ascontiguousarray(np.asarray(x, dtype=np.float64).T[None])
    w_t = Tensor(np.asarray(w, dtype=np.float64)[None, :])
    loss, prob, l1, tv = _objective_graph(net, features, w_t, np.array([target_class]), cfg)
    backward(loss)
    return float(prob[0] + l1[0] + tv[0]), w_t.grad[0].copy()


def optimize_mask_batch(net: Network, iq_batch: np.ndarray, cfg: MaskConfig,
                        targets: np.ndarray | None = None,
                        ) -> tuple[list[ClassActivationVector], list[MaskTrace]]:
    """Optimize one mask per capture, vectorized over the batch.

    Every sample owns an independent mask; the batched loss is the sum of
    per-sample objectives, so gradients never couple samples and the result
    matches per-sample optimization.  Returns the best evaluated iterate of
    each sample.
    """
    iq_batch = np.asarray(iq_batch)
    if iq_batch.ndim == 1:
        iq_batch = iq_batch[None, :]
    dtype = next(iter(net.params.values())).dtype
    features = format_features(iq_batch, net.spec.input_format, dtype=dtype)
    batch, _, n_x = features.shape

    if targets is None:
        logits = net.logits(features)
        targets = np.argmax(logits, axis=1)
    targets = np.asarray(targets, dtype=np.int64)

    w = Tensor(np.full((batch, n_x), cfg.init_value, dtype=dtype), name="mask")
    optimizer = Adam({"mask": w}, lr=cfg.step_size)

    n_iter = cfg.iterations
    objective = np.empty((n_iter, batch))
    probability = np.empty((n_iter, batch))
    l1 = np.empty((n_iter, batch))
    tv = np.empty((n_iter, batch))
    best_value = np.full(batch, np.inf)
    best_index = np.zeros(batch, dtype=int)
    best_w = np.empty((batch, n_x), dtype=np.float64)

    for k in range(n_iter):
        loss, prob_vals, l1_vals, tv_vals = _objective_graph(net, features, w, targets, cfg)
        totals = prob_vals + l1_vals + tv_vals
        if not np.all(np.isfinite(totals)):
            raise MaskDivergedError(k)
        objective[k] = totals
        probability[k] = prob_vals
        l1[k] = l1_vals
        tv[k] = tv_vals
        improved = totals < best_value
        if improved.any():
            best_value[improved] = totals[improved]
            best_index[improved] = k
            best_w[improved] = w.data[improved]
        optimizer.zero_grad()
        backward(loss)
        optimizer.step()
        np.clip(w.data, 0.0, 1.0, out=w.data)

    cavs = []
    traces = []
    for b in range(batch):
        cavs.append(
            ClassActivationVector(
                w=np.clip(best_w[b], 0.0, 1.0),
                target_class=int(targets[b]),
                method=METHOD_MASK,
                pre_resize_length=n_x,
            )
        )
        traces.append(
            MaskTrace(
                objective=objective[:, b].copy(),
                probability=probability[:, b].copy(),
                l1=l1[:, b].copy(),
                tv=tv[:, b].copy(),
                best_index=int(best_index[b]),
            )
        )
    return cavs, traces


def optimize_mask(net: Network, iq_sample: np.ndarray, cfg: MaskConfig,
                  target_class: int | None = None) -> tuple[ClassActivationVector, MaskTrace]:
    """Optimize the class activation vector for one capture."""
    targets = None if target_class is None else np.array([target_class])
    cavs, traces = optimize_mask_batch(net, np.asarray(iq_sample)[None, :], cfg, targets)
    return cavs[0], traces[0]


def dataset_mean_input(ds: Dataset, input_format: str) -> float:
    """Mean over all training-split model-input channel values.

    Resolves the "mean of input signals" deletion-value option against the
    same representation the classifier consumes.
    """
    idx = ds.indices("train")
    if len(idx) == 0:
        idx = ds.indices(None)
    features = format_features(ds.iq[idx], input_format, dtype=np.float64)
    return float(features.mean())
