"""Tiny deterministic SVG writer.

String building only, with fixed-precision coordinate formatting, so a
render is byte-identical on every run with the same inputs.
"""

from __future__ import annotations


def fmt(value: float) -> str:
    return f"{float(value):.4f}"


def circle(cx: float, cy: float, r: float, fill: str) -> str:
    return f'<circle cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" fill="{fill}"/>'


def line(x1: float, y1: float, x2: float, y2: float, stroke: str, width: float = 1.0) -> str:
    return (
        f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
        f'stroke="{stroke}" stroke-width="{fmt(width)}"/>'
    )


def rect(x: float, y: float, w: float, h: float, fill: str, stroke: str | None = None) -> str:
    edge = f' stroke="{stroke}"' if stroke else ""
    return f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(w)}" height="{fmt(h)}" fill="{fill}"{edge}/>'


def text(x: float, y: float, content: str, size: float = 10.0, anchor: str = "middle",
         fill: str = "black") -> str:
    return (
        f'<text x="{fmt(x)}" y="{fmt(y)}" font-size="{fmt(size)}" font-family="monospace" '
        f'text-anchor="{anchor}" fill="{fill}">{escape(content)}</text>'
    )


def polyline(points: list[tuple[float, float]], stroke: str, width: float = 1.0) -> str:
    coords = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in points)
    return f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{fmt(width)}"/>'


def group(transform: str, body: list[str]) -> str:
    return f'<g transform="{transform}">' + "".join(body) + "</g>"


def comment(content: str) -> str:
    return f"<!-- {content.replace('--', 'door')} -->"


def escape(content: str) -> str:
    return content.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def document(width: float, height: float, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(width)}" height="{fmt(height)}" '
        f'viewBox="0 0 {fmt(width)} {fmt(height)}">\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"
