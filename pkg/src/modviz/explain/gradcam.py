"""Gradient-weighted class activation vectors for the CNN classifiers.

Pipeline: forward with the feature-map tap, backpropagate from the
pre-softmax score of the predicted class, average each gradient map into a
per-map weight, ReLU the weighted sum of maps, normalize to [0, 1] by the
maximum, and resize to the input length with half-pixel-center bilinear
interpolation when the tap is shorter than the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, backward
from ..autodiff import ops
from ..models import Network, format_features

METHOD_GRADCAM = "gradcam"
METHOD_MASK = "mask"


@dataclass(frozen=True)
class ClassActivationVector:
    """Per-sample-point significance weights in [0, 1] with provenance."""

    w: np.ndarray
    target_class: int
    method: str
    pre_resize_length: int

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        if w.ndim != 1:
            raise ValueError("class activation vector must be 1-D")
        if w.size and (w.min() < -1e-12 or w.max() > 1.0 + 1e-12):
            raise ValueError("class activation weights must lie in [0, 1]")


@dataclass(frozen=True)
class FeatureMapSet:
    """Tapped feature maps, N_f arrays of shape U x V (U = 1 here)."""

    maps: np.ndarray
    tap_name: str
    sample_id: str = ""

    def __post_init__(self):
        maps = np.asarray(self.maps)
        if maps.ndim == 2:
            maps = maps[:, None, :]
        object.__setattr__(self, "maps", maps)
        if maps.ndim != 3:
            raise ValueError(f"feature maps must be (N_f, U, V), got {maps.shape}")
        if not np.all(np.isfinite(maps)):
            raise ValueError("feature maps contain non-finite values")


def gradcam_alphas(maps: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Per-map importance: the mean of each map's score gradient."""
    maps = np.asarray(maps)
    grads = np.asarray(grads)
    if maps.shape != grads.shape:
        raise ValueError(f"maps {maps.shape} and grads {grads.shape} disagree")
    flat = grads.reshape(grads.shape[0], -1)
    return flat.mean(axis=1)


def gradcam_vector(maps: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """ReLU of the alpha-weighted sum of feature maps, length V."""
    maps = np.asarray(maps)
    alphas = np.asarray(alphas)
    if maps.shape[0] != alphas.shape[0]:
        raise ValueError(f"{maps.shape[0]} maps but {alphas.shape[0]} alphas")
    stacked = maps.reshape(maps.shape[0], -1)
    combined = alphas @ stacked
    return np.maximum(combined, 0.0)


def normalize_unit(v: np.ndarray) -> np.ndarray:
    """Divide by the maximum; an all-zero vector passes through unchanged."""
    v = np.asarray(v, dtype=np.float64)
    if v.size and v.min() < 0:
        raise ValueError("normalize_unit expects a nonnegative (post-ReLU) vector")
    peak = v.max() if v.size else 0.0
    return v / peak if peak > 0 else v.copy()


def resize_bilinear(v: np.ndarray, target_len: int) -> np.ndarray:
    """Half-pixel-center bilinear resize with edge clamping."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot resize an empty vector")
    src_len = v.size
    if src_len == target_len:
        return v.copy()
    s = (np.arange(target_len) + 0.5) * (src_len / target_len) - 0.5
    s = np.clip(s, 0.0, src_len - 1.0)
    lo = np.floor(s).astype(int)
    hi = np.minimum(lo + 1, src_len - 1)
    frac = s - lo
    return v[lo] * (1.0 - frac) + v[hi] * frac


def explain_gradcam(net: Network, iq_sample: np.ndarray,
                    target_class: int | None = None) -> ClassActivationVector:
    """Class activation vector for one capture from a tapped CNN.

    The backward pass starts from the pre-softmax score of ``target_class``
    (default: the predicted class); dropout stays disabled so the saliency
    is a pure function of (model, sample).
    """
    spec = net.spec
    features = format_features(np.asarray(iq_sample)[None, :], spec.input_format)
    logits, tap = net.forward_graph(Tensor(features), train=False, want_tap=True)
    j_star = int(np.argmax(logits.data[0])) if target_class is None else int(target_class)
    score = ops.tensor_sum(ops.take_along_batch(logits, np.array([j_star])))
    backward(score)

    map_set = FeatureMapSet(tap.data[0], tap_name=spec.tap or "")
    grad_maps = tap.grad[0][:, None, :]
    alphas = gradcam_alphas(map_set.maps, grad_maps)
    vector = gradcam_vector(map_set.maps, alphas)
    w = resize_bilinear(normalize_unit(vector), spec.n_x)
    return ClassActivationVector(
        w=w, target_class=j_star, method=METHOD_GRADCAM, pre_resize_length=vector.size
    )
