"""Classifier architectures, runnable networks, and checkpoint I/O."""

from .specs import (
    ARCH_LENET,
    ARCH_LSTM,
    ARCH_RESNET,
    FORMATS,
    ModelSpec,
    TapError,
    build_lenet,
    build_lstm,
    build_resnet,
    build_spec,
    forward_graph,
    init_params,
    parameter_count,
)
from .network import Network, PredictionVector, format_features, softmax_probs
from .checkpoint import CheckpointError, load_checkpoint, read_manifest, save_checkpoint

__all__ = [
    "ARCH_LENET",
    "ARCH_LSTM",
    "ARCH_RESNET",
    "FORMATS",
    "ModelSpec",
    "TapError",
    "build_lenet",
    "build_lstm",
    "build_resnet",
    "build_spec",
    "forward_graph",
    "init_params",
    "parameter_count",
    "Network",
    "PredictionVector",
    "format_features",
    "softmax_probs",
    "CheckpointError",
    "load_checkpoint",
    "read_manifest",
    "save_checkpoint",
]
