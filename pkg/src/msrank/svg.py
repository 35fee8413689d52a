"""Static SVG: data scatter above, minimal detected intervals below."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ranks import Dataset
from .report import Interval, TestReport

__all__ = ["pack_rows", "render_svg"]

WIDTH = 720
MARGIN_L, MARGIN_R, MARGIN_T = 60, 20, 30
PLOT_H = 280
GAP = 40
ROW_H = 12


def pack_rows(intervals: list[Interval]) -> list[int]:
    """Greedy row assignment: non-overlapping intervals share a row.

    Returns the 0-based row of each interval, in input order.
    """
    order = sorted(range(len(intervals)), key=lambda i: (intervals[i].j, intervals[i].k))
    row_end: list[int] = []
    rows = [0] * len(intervals)
    for i in order:
        iv = intervals[i]
        for r, end in enumerate(row_end):
            if end < iv.j:
                row_end[r] = iv.k
                rows[i] = r
                break
        else:
            row_end.append(iv.k)
            rows[i] = len(row_end) - 1
    return rows


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_svg(d: Dataset, r: TestReport, out_path=None) -> str:
    """Render the SVG document; also write it to ``out_path`` when given."""
    if r.n != d.n:
        raise ValueError(f"report is for n={r.n}, dataset has n={d.n}")
    ivs = list(r.minimal_intervals)
    rows = pack_rows(ivs)
    n_rows = max(rows, default=-1) + 1
    low_h = max(40, n_rows * ROW_H + 20)
    height = MARGIN_T + PLOT_H + GAP + low_h + 30
    pw = WIDTH - MARGIN_L - MARGIN_R

    x0, x1 = float(d.x[0]), float(d.x[-1])
    y0, y1 = float(d.y.min()), float(d.y.max())
    if y0 == y1:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN_T + (y1 - v) / (y1 - y0) * PLOT_H

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
        f'<text x="{MARGIN_L}" y="18">{r.method} test: T_n={r.t_n:.4f}, kappa={r.kappa:.4f}, '
        f"p={r.p_value:.4f}, {len(ivs)} minimal intervals</text>",
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{PLOT_H}" fill="none" stroke="#444"/>',
    ]
    if y0 < 0 < y1:
        out.append(
            f'<line x1="{MARGIN_L}" y1="{_f(sy(0))}" x2="{MARGIN_L + pw}" y2="{_f(sy(0))}" '
            f'stroke="#999" stroke-dasharray="4,3"/>'
        )
    for xv, yv in zip(d.x, d.y):
        out.append(f'<circle cx="{_f(sx(xv))}" cy="{_f(sy(yv))}" r="2.2" fill="#1f4e99"/>')
    for v in np.linspace(x0, x1, 5):
        out.append(f'<text x="{_f(sx(v))}" y="{MARGIN_T + PLOT_H + 14}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(y0, y1, 5):
        out.append(f'<text x="{MARGIN_L - 6}" y="{_f(sy(v) + 4)}" text-anchor="end">{v:.3g}</text>')

    top = MARGIN_T + PLOT_H + GAP
    out.append(f'<rect x="{MARGIN_L}" y="{top}" width="{pw}" height="{low_h}" fill="none" stroke="#444"/>')
    out.append(f'<text x="{MARGIN_L}" y="{top - 6}">minimal intervals (alpha={r.alpha:g})</text>')
    for iv, row in zip(ivs, rows):
        yy = top + 10 + row * ROW_H
        color = "#c0392b" if iv.direction == "+" else "#27ae60"
        out.append(
            f'<line x1="{_f(sx(iv.x_j))}" y1="{yy}" x2="{_f(sx(iv.x_k))}" y2="{yy}" '
            f'stroke="{color}" stroke-width="3"/>'
        )
    out.append("</svg>")
    doc = "\n".join(out) + "\n"
    if out_path is not None:
        Path(out_path).write_text(doc)
    return doc
