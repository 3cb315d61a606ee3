"""Runnable model: spec + parameters, plus the input-format adapters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor
from ..signals import to_amplitude_phase
from .specs import ModelSpec, build_spec, forward_graph, init_params


@dataclass(frozen=True)
class PredictionVector:
    """Per-class probabilities with the pre-softmax scores that formed them."""

    probs: np.ndarray
    logits: np.ndarray
    j_star: int


def format_features(iq: np.ndarray, input_format: str, dtype=np.float32) -> np.ndarray:
    """Adapt complex captures (B, n_x) to channels-first features (B, 2, n_x).

    "iq" stacks the raw in-phase and quadrature components.  "ap" applies the
    amplitude/phase transform, then scales amplitude by its per-sample RMS and
    phase by pi so both channels are O(1).
    """
    iq = np.asarray(iq)
    if iq.ndim == 1:
        iq = iq[None, :]
    if input_format == "iq":
        out = np.stack([iq.real, iq.imag], axis=1)
    elif input_format == "ap":
        amp, phase = to_amplitude_phase(iq)
        rms = np.sqrt(np.mean(amp**2, axis=1, keepdims=True))
        rms = np.where(rms > 0, rms, 1.0)
        out = np.stack([amp / rms, phase / np.pi], axis=1)
    else:
        raise ValueError(f"unknown input format {input_format!r}")
    return np.ascontiguousarray(out, dtype=dtype)


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class Network:
    """A classifier with materialized parameters.

    Parameters are treated as an immutable snapshot by inference and
    explanation code; training mutates its own private copy.
    """

    def __init__(self, spec: ModelSpec, params: dict[str, Tensor]):
        self.spec = spec
        self.params = params

    @classmethod
    def build(cls, arch: str, n_x: int, n_y: int, input_format: str,
              seed: int = 0, dtype=np.float32, **hyper) -> "Network":
        spec = build_spec(arch, n_x, n_y, input_format, **hyper)
        return cls(spec, init_params(spec, seed, dtype))

    def clone_params(self) -> dict[str, Tensor]:
        return {k: Tensor(p.data.copy(), name=k) for k, p in self.params.items()}

    def copy(self) -> "Network":
        return Network(self.spec, self.clone_params())

    def forward_graph(self, x: Tensor, train: bool = False,
                      rng: np.random.Generator | None = None, want_tap: bool = False):
        return forward_graph(self.spec, self.params, x, train, rng, want_tap)

    def logits(self, features: np.ndarray) -> np.ndarray:
        """Inference-mode logits for a (B, 2, n_x) feature batch."""
        out, _ = self.forward_graph(Tensor(np.ascontiguousarray(features)))
        return out.data

    def predict_proba_iq(self, iq: np.ndarray) -> np.ndarray:
        return softmax_probs(self.logits(format_features(iq, self.spec.input_format)))

    def predict_one(self, iq_sample: np.ndarray) -> PredictionVector:
        features = format_features(iq_sample[None, :], self.spec.input_format)
        logits = self.logits(features)[0]
        probs = softmax_probs(logits)
        return PredictionVector(probs=probs, logits=logits, j_star=int(np.argmax(probs)))
