"""Confusion-matrix heatmaps with numeric cell labels."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import svg

CELL = 34
LABEL_GUTTER = 64


def _absolute_fill(value: float) -> str:
    # white at 0 to deep blue at 1
    v = float(np.clip(value, 0.0, 1.0))
    r = int(np.floor(255 * (1 - v) + 0.5))
    g = int(np.floor(255 * (1 - 0.75 * v) + 0.5))
    return f"rgb({r},{g},255)"


def _diverging_fill(value: float, scale: float) -> str:
    # signed shading centered at 0: blue for positive, red for negative
    v = float(np.clip(value / scale, -1.0, 1.0)) if scale > 0 else 0.0
    mag = int(np.floor(200 * abs(v) + 0.5))
    if v >= 0:
        return f"rgb({255 - mag},{255 - mag},255)"
    return f"rgb(255,{255 - mag},{255 - mag})"


def render_confusion(matrix: np.ndarray, labels: tuple[str, ...], path: str | Path,
                     title: str = "") -> None:
    """Heat-shaded grid with two-decimal cell labels.

    Matrices containing negative values (relative confusion) are shaded on a
    signed diverging ramp centered at zero; otherwise cells shade from white
    to blue over [0, 1].
    """
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError(f"confusion matrix must be square, got {matrix.shape}")
    if len(labels) != n:
        raise ValueError(f"{n}x{n} matrix needs {n} labels, got {len(labels)}")
    signed = bool(matrix.min() < 0)
    scale = float(np.max(np.abs(matrix))) if signed else 1.0

    body = []
    if title:
        body.append(svg.text(LABEL_GUTTER, 14, title, size=12, anchor="start"))
    top = 22
    for row in range(n):
        y = top + row * CELL
        body.append(svg.text(LABEL_GUTTER - 6, y + CELL * 0.65, labels[row], size=9, anchor="end"))
        for col in range(n):
            x = LABEL_GUTTER + col * CELL
            value = matrix[row, col]
            fill = _diverging_fill(value, scale) if signed else _absolute_fill(value)
            body.append(svg.rect(x, y, CELL, CELL, fill=fill, stroke="rgb(220,220,220)"))
            body.append(svg.text(x + CELL / 2, y + CELL * 0.62, f"{value:.2f}", size=8))
    for col in range(n):
        x = LABEL_GUTTER + col * CELL
        body.append(
            svg.text(x + CELL / 2, top + n * CELL + 12, labels[col], size=9)
        )
    width = LABEL_GUTTER + n * CELL + 10
    height = top + n * CELL + 22
    Path(path).write_text(svg.document(width, height, body), encoding="utf-8")
