"""Weighted constellations, time-domain traces, and sweep panels.

Each sample point is colored on a yellow-to-red ramp by its activation
weight, and consecutive points whose weights both exceed the activation
threshold are joined with a green segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..explain import ClassActivationVector
from ..signals import to_amplitude_phase
from . import svg

GREEN = "rgb(0,160,0)"


@dataclass(frozen=True)
class RenderSpec:
    eta_w: float = 0.4  # activation threshold for connecting segments
    point_radius: float = 3.0
    canvas: int = 360
    margin: float = 0.1
    axis_mode: str = "iq"  # "iq" plots (I, Q); "ap" derives positions from (A, phi)

    def __post_init__(self):
        if not 0.0 <= self.eta_w <= 1.0:
            raise ValueError(f"eta_w must be in [0, 1], got {self.eta_w}")
        if self.axis_mode not in ("iq", "ap"):
            raise ValueError(f"axis_mode must be 'iq' or 'ap', got {self.axis_mode!r}")


def ramp_color(weight: float) -> tuple[int, int, int]:
    """Yellow (w=0) to red (w=1), linear in RGB with round-half-up."""
    green = int(np.floor(255.0 * (1.0 - weight) + 0.5))
    return (255, green, 0)


def color_points(w: np.ndarray) -> list[tuple[int, int, int]]:
    w = np.asarray(w, dtype=float)
    return [ramp_color(v) for v in w]


def connect_segments(w: np.ndarray, eta_w: float) -> list[tuple[int, int]]:
    """Consecutive index pairs whose weights are both strictly above eta_w."""
    w = np.asarray(w, dtype=float)
    above = w > eta_w
    keep = above[:-1] & above[1:]
    return [(int(i), int(i) + 1) for i in np.flatnonzero(keep)]


def _point_coordinates(sample_iq: np.ndarray, axis_mode: str) -> tuple[np.ndarray, np.ndarray]:
    sample_iq = np.asarray(sample_iq)
    if axis_mode == "iq":
        return sample_iq.real.astype(float), sample_iq.imag.astype(float)
    amp, phase = to_amplitude_phase(sample_iq)
    return amp * np.cos(phase), amp * np.sin(phase)


def _constellation_body(sample_iq, cav: ClassActivationVector, spec: RenderSpec,
                        offset=(0.0, 0.0)) -> list[str]:
    xs, ys = _point_coordinates(sample_iq, spec.axis_mode)
    if len(xs) != cav.w.size:
        raise ValueError(f"sample has {len(xs)} points but w has {cav.w.size}")
    half = max(float(np.max(np.abs(xs))), float(np.max(np.abs(ys))), 1e-12)
    half *= 1.0 + spec.margin
    size = spec.canvas

    def to_canvas(x, y):
        return (
            offset[0] + (x / half * 0.5 + 0.5) * size,
            offset[1] + (0.5 - y / half * 0.5) * size,
        )

    body = [svg.comment(f"scale: half-range {svg.fmt(half)} mapped to {size}px")]
    for i, j in connect_segments(cav.w, spec.eta_w):
        x1, y1 = to_canvas(xs[i], ys[i])
        x2, y2 = to_canvas(xs[j], ys[j])
        body.append(svg.line(x1, y1, x2, y2, GREEN, width=1.2))
    for i, (r, g, b) in enumerate(color_points(cav.w)):
        cx, cy = to_canvas(xs[i], ys[i])
        body.append(svg.circle(cx, cy, spec.point_radius, f"rgb({r},{g},{b})"))
    return body


def render_constellation(sample_iq, cav: ClassActivationVector, spec: RenderSpec,
                         path: str | Path) -> None:
    """One circle per sample point, one green line per connected pair."""
    content = svg.document(spec.canvas, spec.canvas, _constellation_body(sample_iq, cav, spec))
    Path(path).write_text(content, encoding="utf-8")


def render_time_trace(sample_iq, cav: ClassActivationVector, spec: RenderSpec,
                      path: str | Path) -> None:
    """Both channels against sample index, points colored by weight."""
    sample_iq = np.asarray(sample_iq)
    n = len(sample_iq)
    if n != cav.w.size:
        raise ValueError(f"sample has {n} points but w has {cav.w.size}")
    channels = [sample_iq.real.astype(float), sample_iq.imag.astype(float)]
    peak = max(float(np.max(np.abs(channels[0]))), float(np.max(np.abs(channels[1]))), 1e-12)
    peak *= 1.0 + spec.margin
    width, lane = spec.canvas * 2, spec.canvas // 2

    def to_canvas(i, value, chan):
        return ((i + 0.5) / n * width, (chan + 0.5 - value / peak * 0.5) * lane)

    body = [svg.comment(f"scale: peak {svg.fmt(peak)}; I in top lane, Q in bottom")]
    colors = color_points(cav.w)
    pairs = connect_segments(cav.w, spec.eta_w)
    for chan, values in enumerate(channels):
        pts = [to_canvas(i, v, chan) for i, v in enumerate(values)]
        body.append(svg.polyline(pts, stroke="rgb(180,180,180)"))
        for i, j in pairs:
            body.append(svg.line(*pts[i], *pts[j], GREEN, width=1.2))
        for i, (r, g, b) in enumerate(colors):
            body.append(svg.circle(*pts[i], spec.point_radius * 0.6, f"rgb({r},{g},{b})"))
    Path(path).write_text(svg.document(width, lane * 2, body), encoding="utf-8")


def render_sweep_panel(records: list[tuple[str, np.ndarray, ClassActivationVector, RenderSpec]],
                       axis: str, path: str | Path) -> None:
    """Side-by-side constellations, one per swept parameter value.

    Each record is (label, sample_iq, cav, spec); ``axis`` names the swept
    parameter in the panel title line.
    """
    if not records:
        raise ValueError("sweep panel needs at least one record")
    size = records[0][3].canvas
    header = 24
    body = [svg.text(8, 16, f"sweep: {axis}", size=12, anchor="start")]
    for k, (label, sample_iq, cav, spec) in enumerate(records):
        offset = (k * (size + 8.0), header)
        body.append(svg.rect(offset[0], header, size, size, fill="white", stroke="rgb(200,200,200)"))
        body.extend(_constellation_body(sample_iq, cav, spec, offset=offset))
        body.append(svg.text(offset[0] + size / 2, header + size + 14, label, size=11))
    width = len(records) * (size + 8.0)
    Path(path).write_text(svg.document(width, size + header + 20, body), encoding="utf-8")
