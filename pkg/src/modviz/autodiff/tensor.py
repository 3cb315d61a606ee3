"""Reverse-mode automatic differentiation on dense numpy arrays.

A :class:`Tensor` wraps an ndarray together with its gradient, the parent
nodes that produced it, and a closure that pushes the output gradient back
to those parents.  Graphs are built eagerly by the operations in
:mod:`modviz.autodiff.ops`; calling :func:`backward` on a scalar node walks
the graph once in reverse topological order.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class Tensor:
    """One node of the computation graph.

    ``data`` and ``grad`` always share shape and dtype.  ``grad`` starts at
    zero and accumulates contributions from every use of the node, so a
    tensor consumed twice receives both terms.
    """

    __slots__ = ("data", "grad", "parents", "backward_rule", "name")

    def __init__(
        self,
        data: np.ndarray,
        parents: Sequence["Tensor"] = (),
        backward_rule: Callable[[np.ndarray], None] | None = None,
        name: str = "",
    ):
        self.data = np.asarray(data)
        self.grad = np.zeros_like(self.data)
        self.parents = tuple(parents)
        self.backward_rule = backward_rule
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad[...] = 0

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.data.shape}, dtype={self.data.dtype})"

    # Operator sugar lives in ops.py to keep this module dependency-free;
    # the bindings are attached at import time by ops._install_operators().


def topo_order(root: Tensor) -> list[Tensor]:
    """Every node reachable from ``root``, parents before children."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate gradients of ``loss`` into every reachable tensor.

    ``loss`` must be scalar (shape ``()`` or a single element).  Each node's
    backward rule runs exactly once, after all gradient contributions to the
    node have arrived.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward requires a scalar loss, got shape {loss.data.shape}")
    order = topo_order(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node.backward_rule is not None:
            node.backward_rule(node.grad)
