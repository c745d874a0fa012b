"""Minimal deterministic SVG figures: no plotting dependency, diffable output.

Two figure kinds: a trajectory figure (solution components stacked above
the step-size sequence on a log scale, stabilizing steps marked in red)
and a stability-region figure (marching-squares contour of |P(z)| = 1 in
the complex plane).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .damping import eval_region_poly

__all__ = ["trajectory_figure", "region_figure"]

_WIDTH, _HEIGHT = 720, 540
_MARGIN = 50
_COLORS = ("#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f")
_MAX_COMPONENTS = 8


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Panel:
    """Maps data coordinates onto one vertical band of the SVG canvas."""

    def __init__(self, x0, x1, y0, y1, top, bottom):
        self.x0, self.x1 = x0, x1
        self.y0, self.y1 = y0, y1
        self.top, self.bottom = top, bottom

    def px(self, x):
        span = self.x1 - self.x0 or 1.0
        return _MARGIN + (x - self.x0) / span * (_WIDTH - 2 * _MARGIN)

    def py(self, y):
        span = self.y1 - self.y0 or 1.0
        return self.bottom - (y - self.y0) / span * (self.bottom - self.top)

    def polyline(self, xs, ys, color, width=1.2, dasharray=None):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        dash = f' stroke-dasharray="{dasharray}"' if dasharray else ""
        return (
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash} '
            f'points="{pts}"/>'
        )

    def frame(self, xlabel, ylabel):
        parts = [
            f'<rect x="{_MARGIN}" y="{self.top}" width="{_WIDTH - 2 * _MARGIN}" '
            f'height="{self.bottom - self.top}" fill="none" stroke="#333" stroke-width="1"/>',
            f'<text x="{_WIDTH // 2}" y="{self.bottom + 30}" text-anchor="middle" '
            f'font-size="13">{xlabel}</text>',
            f'<text x="{_MARGIN - 35}" y="{(self.top + self.bottom) / 2:.0f}" font-size="13" '
            f'transform="rotate(-90 {_MARGIN - 35} {(self.top + self.bottom) / 2:.0f})" '
            f'text-anchor="middle">{ylabel}</text>',
        ]
        return "\n".join(parts)


def _svg_document(body: str) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">\n<rect width="100%" height="100%" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )


def trajectory_figure(trajectory, path: Path, title: str = "") -> Path:
    """Solution components (top) and log-scale step sizes (bottom).

    Stabilizing steps are drawn dashed red in the step panel, echoing how
    stability-limited steps are usually distinguished from accuracy-limited
    ones.
    """
    nodes = list(trajectory)
    times = np.array([n.t for n in nodes])
    states = np.array([n.state for n in nodes])
    ncomp = min(states.shape[1], _MAX_COMPONENTS)

    half = (_HEIGHT - 2 * _MARGIN - 40) // 2
    top_panel = _Panel(
        times.min(), times.max(),
        float(states[:, :ncomp].min()), float(states[:, :ncomp].max()),
        _MARGIN, _MARGIN + half,
    )
    body = [f'<text x="{_WIDTH // 2}" y="25" text-anchor="middle" font-size="15">{title}</text>']
    for j in range(ncomp):
        body.append(
            top_panel.polyline(times, states[:, j], _COLORS[j % len(_COLORS)])
        )
    body.append(top_panel.frame("", "U(t)"))

    step_nodes = [n for n in nodes if n.k > 0]
    if step_nodes:
        logk = [math.log10(n.k) for n in step_nodes]
        lo, hi = min(logk), max(logk)
        if hi - lo < 0.5:
            lo, hi = lo - 0.5, hi + 0.5
        bot_panel = _Panel(times.min(), times.max(), lo, hi, _MARGIN + half + 40, _HEIGHT - _MARGIN)
        # Contiguous runs of one kind become one polyline.
        run_x, run_y, run_kind = [], [], None
        segments = []
        for n in step_nodes:
            if run_kind is not None and n.kind != run_kind:
                segments.append((run_kind, run_x, run_y))
                run_x, run_y = [run_x[-1]], [run_y[-1]]
            run_x.append(n.t)
            run_y.append(math.log10(n.k))
            run_kind = n.kind
        segments.append((run_kind, run_x, run_y))
        for kind, xs, ys in segments:
            if kind == "stabilizing":
                body.append(bot_panel.polyline(xs, ys, "#d62728", 1.0, dasharray="3,2"))
            else:
                body.append(bot_panel.polyline(xs, ys, "#1f77b4", 1.2))
        body.append(bot_panel.frame("t", "log10 k(t)"))

    path.write_text(_svg_document("\n".join(body)))
    return path


def _marching_squares(field: np.ndarray, xs: np.ndarray, ys: np.ndarray, level: float):
    """Line segments of the level set, one pair of endpoints per crossing cell."""
    segs = []
    b = field > level
    for i in range(field.shape[0] - 1):
        for j in range(field.shape[1] - 1):
            square = (b[i, j], b[i, j + 1], b[i + 1, j + 1], b[i + 1, j])
            if all(square) or not any(square):
                continue
            corners = (
                (xs[j], ys[i], field[i, j]),
                (xs[j + 1], ys[i], field[i, j + 1]),
                (xs[j + 1], ys[i + 1], field[i + 1, j + 1]),
                (xs[j], ys[i + 1], field[i + 1, j]),
            )
            crossings = []
            for a in range(4):
                x1, y1, v1 = corners[a]
                x2, y2, v2 = corners[(a + 1) % 4]
                if (v1 > level) != (v2 > level):
                    s = (level - v1) / (v2 - v1)
                    crossings.append((x1 + s * (x2 - x1), y1 + s * (y2 - y1)))
            for a in range(0, len(crossings) - 1, 2):
                segs.append((crossings[a], crossings[a + 1]))
    return segs


def region_figure(method: str, params, path: Path, nx: int = 600, ny: int = 400) -> Path:
    """|P(z)| = 1 contour over [-X-5, 1] x [-r, r] with X the real-axis extent."""
    if method == "chebyshev":
        m = int(params) if not hasattr(params, "degree") else params.degree
        extent = 2.0 * m * m
        label = f"chebyshev m={m}"
        poly_params = m
    elif method == "dyadic":
        if hasattr(params, "levels"):
            p, q = params.levels, params.multiple_levels
        else:
            p, q = map(int, params)
        extent = 2.0**q * (q + 1) + 2.0 ** (p + 1) - 2.0 ** (q + 1)
        label = f"dyadic p={p} q={q}"
        poly_params = (p, q)
    else:
        raise ValueError(f"unknown region method {method!r}")

    r = max(4.0, extent / 6.0)
    xs = np.linspace(-extent - 5.0, 1.0, nx)
    ys = np.linspace(-r, r, ny)
    Z = xs[None, :] + 1j * ys[:, None]
    field = np.abs(eval_region_poly(Z, method, poly_params))

    panel = _Panel(xs[0], xs[-1], ys[0], ys[-1], _MARGIN, _HEIGHT - _MARGIN)
    body = [
        f'<text x="{_WIDTH // 2}" y="25" text-anchor="middle" font-size="15">'
        f"stability region, {label}</text>"
    ]
    for (x1, y1), (x2, y2) in _marching_squares(field, xs, ys, 1.0):
        body.append(
            f'<line x1="{_f(panel.px(x1))}" y1="{_f(panel.py(y1))}" '
            f'x2="{_f(panel.px(x2))}" y2="{_f(panel.py(y2))}" stroke="#1f77b4" stroke-width="0.8"/>'
        )
    # Axes through the origin.
    body.append(
        f'<line x1="{_f(panel.px(xs[0]))}" y1="{_f(panel.py(0))}" x2="{_f(panel.px(xs[-1]))}" '
        f'y2="{_f(panel.py(0))}" stroke="#999" stroke-width="0.6"/>'
    )
    body.append(
        f'<line x1="{_f(panel.px(0))}" y1="{_f(panel.py(ys[0]))}" x2="{_f(panel.px(0))}" '
        f'y2="{_f(panel.py(ys[-1]))}" stroke="#999" stroke-width="0.6"/>'
    )
    body.append(panel.frame("Re z", "Im z"))
    path.write_text(_svg_document("\n".join(body)))
    return path
