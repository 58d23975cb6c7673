"""Deterministic SVG rendering of critical difference diagrams and scatter plots.

The output is plain text built from fixed-precision coordinates, so identical
inputs always give byte-identical documents.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .stats import win_loss

__all__ = ["render_cd_diagram", "render_scatter"]

_FONT = 'font-family="sans-serif" font-size="12"'


def _f(x):
    return f"{x:.2f}"


def _svg(width, height, body):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def render_cd_diagram(report, width=800, title=None):
    """SVG critical difference diagram for a :class:`~mtscbench.stats.CliqueReport`.

    Classifiers appear once each, labelled with their average rank. Cliques
    of two or more classifiers are drawn as solid bars below the axis.
    """
    names = report.classifiers
    k = len(names)
    order = list(report.order)
    lo, hi = 1, max(k, 2)
    margin = 160
    axis_y = 60 if title is None else 80
    left_n = (k + 1) // 2
    n_bars = sum(1 for c in report.cliques if len(c) > 1)
    label_top = axis_y + 30 + 14 * n_bars
    height = label_top + 22 * left_n + 20

    def x_of(rank):
        return margin + (rank - lo) / (hi - lo) * (width - 2 * margin)

    body = []
    if title is not None:
        body.append(f'<text x="{width / 2:.2f}" y="24" text-anchor="middle" {_FONT}>{escape(title)}</text>')
    body.append(f'<line x1="{_f(x_of(lo))}" y1="{axis_y}" x2="{_f(x_of(hi))}" y2="{axis_y}" stroke="black"/>')
    for r in range(lo, hi + 1):
        x = _f(x_of(r))
        body.append(f'<line x1="{x}" y1="{axis_y - 5}" x2="{x}" y2="{axis_y}" stroke="black"/>')
        body.append(f'<text x="{x}" y="{axis_y - 9}" text-anchor="middle" {_FONT}>{r}</text>')

    bar_y = axis_y + 12
    for clique in report.cliques:
        if len(clique) < 2:
            continue
        ranks = [report.ranks[names.index(n)] for n in clique]
        body.append(
            f'<line class="clique" x1="{_f(x_of(min(ranks)) - 3)}" y1="{bar_y}" '
            f'x2="{_f(x_of(max(ranks)) + 3)}" y2="{bar_y}" stroke="black" stroke-width="4"/>'
        )
        bar_y += 14

    for pos, i in enumerate(order):
        rank = report.ranks[i]
        x = x_of(rank)
        if pos < left_n:
            y, tx, anchor = label_top + 22 * pos, 10, "start"
            x_end = margin - 10
        else:
            y, tx, anchor = label_top + 22 * (k - 1 - pos), width - 10, "end"
            x_end = width - margin + 10
        body.append(
            f'<polyline points="{_f(x)},{axis_y} {_f(x)},{y} {_f(x_end)},{y}" fill="none" stroke="black"/>'
        )
        label = f"{escape(names[i])} ({rank:.3f})" if anchor == "start" else f"({rank:.3f}) {escape(names[i])}"
        body.append(
            f'<text class="classifier" x="{tx}" y="{y + 4}" text-anchor="{anchor}" {_FONT}>{label}</text>'
        )
    return _svg(width, height, body)


def render_scatter(acc_a, acc_b, name_a="A", name_b="B", size=420):
    """SVG scatter of paired accuracies with the ``y = x`` diagonal.

    ``name_a`` is on the x axis. The annotation reads ``"<W> / <L>"`` where
    ``W`` counts datasets on which ``name_b`` is more accurate and ``L`` those
    on which it is less accurate.
    """
    a = np.asarray(acc_a, dtype=np.float64)
    b = np.asarray(acc_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired accuracies differ in length")
    wins, losses, ties = win_loss(b, a)
    pad = 50
    span = size - 2 * pad

    def px(v):
        return pad + v * span

    def py(v):
        return size - pad - v * span

    body = [
        f'<rect x="{pad}" y="{pad}" width="{span}" height="{span}" fill="none" stroke="black"/>',
        f'<line x1="{_f(px(0))}" y1="{_f(py(0))}" x2="{_f(px(1))}" y2="{_f(py(1))}" stroke="grey" stroke-dasharray="4 3"/>',
        f'<text x="{size / 2:.2f}" y="{size - 12}" text-anchor="middle" {_FONT}>{escape(name_a)}</text>',
        f'<text x="14" y="{size / 2:.2f}" text-anchor="middle" transform="rotate(-90 14 {size / 2:.2f})" {_FONT}>{escape(name_b)}</text>',
        f'<text class="winloss" x="{pad + 8}" y="{pad + 18}" {_FONT}>{escape(name_b)} wins / losses: {wins} / {losses}'
        + (f" ({ties} ties)" if ties else "")
        + "</text>",
    ]
    for va, vb in zip(a, b):
        body.append(f'<circle cx="{_f(px(va))}" cy="{_f(py(vb))}" r="3" fill="black"/>')
    return _svg(size, size, body)
