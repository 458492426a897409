"""SVG pictures: the disk with class hulls, and the quotient tree.

Output is plain text built with fixed float formatting, so the same input
always gives byte-identical files.
"""
from __future__ import annotations

import math

from .circle import to_float
from .dendrite import DendriteApprox, point_kind
from .lamination import Lamination, orbit_portrait

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _num(x: float) -> str:
    return f"{x:.3f}"


def _color(L: Lamination, c) -> str:
    pre, per, _ = orbit_portrait(c, L.degree)
    if pre == 0:
        return "#000000"
    return PALETTE[(pre - 1) % len(PALETTE)]


def disk_svg(L: Lamination, size: int = 600) -> str:
    r = size / 2 - 10
    cx = cy = size / 2

    def pt(a):
        t = 2 * math.pi * to_float(a)
        return cx + r * math.cos(t), cy - r * math.sin(t)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(r)}" fill="none" stroke="#888888"/>']
    for c in L.classes:
        col = _color(L, c)
        pts = [pt(a) for a in c.angles]
        if len(pts) == 1:
            x, y = pts[0]
            out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="2" fill="{col}"/>')
        elif len(pts) == 2:
            (x1, y1), (x2, y2) = pts
            out.append(f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
                       f'stroke="{col}" stroke-width="0.8"/>')
        else:
            poly = " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)
            out.append(f'<polygon points="{poly}" fill="{col}" fill-opacity="0.25" stroke="{col}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def tree_svg(D: DendriteApprox, width: int = 800, row: int = 40) -> str:
    """Layered drawing: depth in the rooted tree downwards, leaves spread evenly."""
    if not D.vertices:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{row}"></svg>\n'
    slot = {}
    counter = [0]

    def place(v):
        stack = [(v, False)]
        while stack:
            u, done = stack.pop()
            kids = D._children.get(u, [])
            if done or not kids:
                if not kids:
                    slot[u] = counter[0]
                    counter[0] += 1
                else:
                    slot[u] = (slot[kids[0]] + slot[kids[-1]]) / 2
                continue
            stack.append((u, True))
            stack.extend((k, False) for k in reversed(kids))

    place(D.vertices[0])
    n = max(counter[0], 1)
    levels = max(D._level.values()) + 1
    height = row * (levels + 1)

    def xy(v):
        return 10 + (width - 20) * (slot[v] + 0.5) / n, row * (D._level[v] + 0.5)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    for u, v in D.edges:
        (x1, y1), (x2, y2) = xy(u), xy(v)
        out.append(f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" stroke="#888888"/>')
    for v in D.vertices:
        x, y = xy(v)
        kind = point_kind(v).kind
        col = {"endpoint": "#1f77b4", "cutpoint": "#2ca02c", "branchpoint": "#d62728"}[kind]
        out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="3" fill="{col}"><title>{v}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
