"""Minimal hand-written SVG plot of retrieval efficiency versus optical depth."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .analytic import efficiency_backward, efficiency_forward

WIDTH, HEIGHT = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 20, 50
X_MAX = 10.0
Y_MAX = 1.0


def _sx(x: float) -> float:
    return LEFT + (WIDTH - LEFT - RIGHT) * x / X_MAX


def _sy(y: float) -> float:
    return HEIGHT - BOTTOM - (HEIGHT - TOP - BOTTOM) * y / Y_MAX


def _polyline(xs, ys, style: str) -> str:
    pts = " ".join(f"{_sx(x):.2f},{_sy(y):.2f}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" stroke="black" stroke-width="1.5" {style} points="{pts}"/>'


def efficiency_figure(alpha_l: Sequence[float], measured: Sequence[float], n_curve: int = 201) -> str:
    """SVG text: backward closed form solid, forward closed form dotted, measured points as circles.

    Points outside the axes (``alphaL > 10`` or non-finite) are skipped.
    """
    xs = np.linspace(0.0, X_MAX, n_curve)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{_sx(0)}" y1="{_sy(0)}" x2="{_sx(X_MAX)}" y2="{_sy(0)}" stroke="black"/>',
        f'<line x1="{_sx(0)}" y1="{_sy(0)}" x2="{_sx(0)}" y2="{_sy(Y_MAX)}" stroke="black"/>',
    ]
    for x in range(0, 11, 2):
        parts.append(f'<line x1="{_sx(x)}" y1="{_sy(0)}" x2="{_sx(x)}" y2="{_sy(0) + 5}" stroke="black"/>')
        parts.append(f'<text x="{_sx(x)}" y="{_sy(0) + 20}" font-size="12" text-anchor="middle">{x}</text>')
    for i in range(6):
        y = i / 5
        parts.append(f'<line x1="{_sx(0) - 5}" y1="{_sy(y)}" x2="{_sx(0)}" y2="{_sy(y)}" stroke="black"/>')
        parts.append(f'<text x="{_sx(0) - 8}" y="{_sy(y) + 4}" font-size="12" text-anchor="end">{y:.1f}</text>')
    parts.append(f'<text x="{_sx(X_MAX / 2)}" y="{HEIGHT - 10}" font-size="14" text-anchor="middle">αL</text>')
    parts.append(f'<text x="15" y="{_sy(Y_MAX / 2)}" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 15 {_sy(Y_MAX / 2)})">efficiency</text>')
    parts.append('<g id="backward">' + _polyline(xs, efficiency_backward(xs), "") + "</g>")
    parts.append('<g id="forward">' + _polyline(xs, efficiency_forward(xs), 'stroke-dasharray="2,3"') + "</g>")
    parts.append('<g id="measured">')
    for x, y in zip(alpha_l, measured):
        if np.isfinite(x) and np.isfinite(y) and 0 <= x <= X_MAX:
            parts.append(f'<circle cx="{_sx(x):.2f}" cy="{_sy(min(y, Y_MAX)):.2f}" r="4" fill="black"/>')
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_efficiency_figure(path: "str | Path", alpha_l, measured) -> None:
    Path(path).write_text(efficiency_figure(alpha_l, measured))
