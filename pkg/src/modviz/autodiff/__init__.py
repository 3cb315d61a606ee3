"""Minimal reverse-mode autodiff engine used by the classifiers."""

from .tensor import Tensor, backward, topo_order
from .optim import Adam, NonFiniteGradientError
from . import ops

__all__ = ["Tensor", "backward", "topo_order", "Adam", "NonFiniteGradientError", "ops"]
