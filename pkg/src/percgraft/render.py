"""Deterministic SVG scenes for saved configurations.

Every scene starts from a faint grid (one ``<path>`` for all grid lines), so
an empty configuration renders as a blank grid.  Primitive counts are
checked before any markup is built.
"""
from __future__ import annotations

import colorsys
from io import StringIO

import numpy as np

from .lattice import Kind, LatticeGraph

__all__ = [
    "SceneTooLarge",
    "MAX_PRIMITIVES",
    "height_color",
    "render_edges",
    "render_corner",
    "render_interchange",
    "render_sites",
]

MAX_PRIMITIVES = 10**7
PALETTE = ("#d62728", "#1f77b4")


class SceneTooLarge(ValueError):
    pass


def height_color(h: int) -> str:
    """Fixed colour per integer height (golden-ratio hue walk)."""
    hue = (int(h) * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.75, 0.85)
    return "#%02x%02x%02x" % (round(255 * r), round(255 * g), round(255 * b))


class _Scene:
    def __init__(self, width: int, height: int, cell: float, margin: float = 4.0):
        self.w, self.h, self.cell, self.margin = width, height, cell, margin
        self.buf = StringIO()
        W = margin * 2 + cell * (width - 1)
        H = margin * 2 + cell * (height - 1)
        self.buf.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:g}" height="{H:g}" '
            f'viewBox="0 0 {W:g} {H:g}">\n'
            f'<rect width="{W:g}" height="{H:g}" fill="white"/>\n')

    def xy(self, x, y):
        return (self.margin + self.cell * x,
                self.margin + self.cell * (self.h - 1 - y))

    def grid(self, stroke="#e6e6e6"):
        parts = []
        for x in range(self.w):
            (a, b), (c, d) = self.xy(x, 0), self.xy(x, self.h - 1)
            parts.append(f"M{a:g} {b:g}V{d:g}")
        for y in range(self.h):
            (a, b), (c, d) = self.xy(0, y), self.xy(self.w - 1, y)
            parts.append(f"M{a:g} {b:g}H{c:g}")
        self.buf.write(f'<path d="{"".join(parts)}" stroke="{stroke}" '
                       f'stroke-width="{self.cell * 0.05:g}" fill="none"/>\n')

    def segments(self, segs, stroke, width):
        """Segments grouped into one path per colour."""
        if not len(segs):
            return
        d = []
        for x0, y0, x1, y1 in segs:
            (a, b), (c, e) = self.xy(x0, y0), self.xy(x1, y1)
            d.append(f"M{a:g} {b:g}L{c:g} {e:g}")
        self.buf.write(f'<path d="{"".join(d)}" stroke="{stroke}" stroke-width="{width:g}" '
                       f'stroke-linecap="round" fill="none"/>\n')

    def squares(self, cells, fill):
        s = self.cell
        for x, y in cells:
            a, b = self.xy(x, y)
            self.buf.write(f'<rect x="{a - s / 2:g}" y="{b - s / 2:g}" width="{s:g}" '
                           f'height="{s:g}" fill="{fill}"/>\n')

    def finish(self) -> str:
        self.buf.write("</svg>\n")
        return self.buf.getvalue()


def _check(n: int, limit: int):
    if n > limit:
        raise SceneTooLarge(
            f"scene needs {n} primitives (limit {limit}); downsample with --stride "
            "or render a smaller window")


def _grid_dims(g: LatticeGraph):
    if g.kind is Kind.PATH:
        return g.vertex_count, 1
    if not g.is_grid:
        raise ValueError(f"cannot render a {g.kind.value} graph")
    return g.dims


def render_edges(g: LatticeGraph, mask, cell: float = 10.0, stroke: str = "#222222",
                 max_primitives: int = MAX_PRIMITIVES) -> str:
    """Open edges of a bond or loop configuration (wrap-around torus edges
    are drawn as stubs)."""
    mask = np.zeros(g.edge_count, dtype=bool) if mask is None else np.asarray(mask, bool)
    w, h = _grid_dims(g)
    _check(int(mask.sum()) + 2, max_primitives)
    sc = _Scene(w, h, cell)
    sc.grid()
    segs = []
    for u, v in g.edges[mask].tolist():
        (x0, y0), (x1, y1) = g.coord(u), g.coord(v)
        if abs(x1 - x0) + abs(y1 - y0) > 1:   # torus wrap
            x1, y1 = (x0 + 0.5, y0) if y1 == y0 else (x0, y0 + 0.5)
        segs.append((x0, y0, x1, y1))
    sc.segments(segs, stroke, cell * 0.25)
    return sc.finish()


def render_corner(right: np.ndarray, up: np.ndarray, heights=None, labels=None,
                  cell: float = 6.0, max_primitives: int = MAX_PRIMITIVES) -> str:
    """Open edges of a corner window, coloured by cluster height.

    ``right``/``up`` are the window edge masks; ``heights`` the per-vertex
    cluster heights (``(H, W)``).  Paths with equal height share a colour.
    """
    H, W = right.shape[0], up.shape[1]
    _check(int(right.sum() + up.sum()) + 2, max_primitives)
    sc = _Scene(W, H, cell)
    sc.grid()
    groups: dict = {}
    ys, xs = np.nonzero(right)
    for x, y in zip(xs.tolist(), ys.tolist()):
        key = int(heights[y, x]) if heights is not None else None
        groups.setdefault(key, []).append((x, y, x + 1, y))
    ys, xs = np.nonzero(up)
    for x, y in zip(xs.tolist(), ys.tolist()):
        key = int(heights[y, x]) if heights is not None else None
        groups.setdefault(key, []).append((x, y, x, y + 1))
    for key in sorted(groups, key=lambda k: (k is None, k)):
        colour = "#222222" if key is None else height_color(key)
        sc.segments(groups[key], colour, cell * 0.3)
    return sc.finish()


def render_interchange(g: LatticeGraph, cycles, emphasize: int = 2, cell: float = 16.0,
                       max_primitives: int = MAX_PRIMITIVES) -> str:
    """Cycles of an interchange permutation on a grid.

    Each cycle is drawn as the closed sequence of straight jumps
    ``u -> pi(u)``; the ``emphasize`` longest cycles are highlighted, the
    rest drawn faintly.
    """
    w, h = _grid_dims(g)
    n_seg = sum(len(c) for c in cycles if len(c) > 1)
    _check(n_seg + 2, max_primitives)
    order = sorted(range(len(cycles)), key=lambda i: (-len(cycles[i]), min(cycles[i])))
    top = [i for i in order[:emphasize] if len(cycles[i]) > 1]
    sc = _Scene(w, h, cell)
    sc.grid()

    def segs(cyc):
        pts = [g.coord(v) for v in cyc]
        return [(a[0], a[1], b[0], b[1]) for a, b in zip(pts, pts[1:] + pts[:1])]

    faint = [s for i in order if i not in top and len(cycles[i]) > 1 for s in segs(cycles[i])]
    sc.segments(faint, "#bbbbbb", cell * 0.06)
    for rank, i in enumerate(top):
        sc.segments(segs(cycles[i]), PALETTE[rank % len(PALETTE)], cell * 0.14)
    return sc.finish()


def render_sites(g: LatticeGraph, occupied, cell: float = 4.0, fill: str = "#2b6cb0",
                 max_primitives: int = MAX_PRIMITIVES) -> str:
    """Occupied sites as filled squares."""
    occupied = np.asarray(occupied, bool)
    w, h = _grid_dims(g)
    _check(int(occupied.sum()) + 2, max_primitives)
    sc = _Scene(w, h, cell)
    sc.grid()
    sc.squares([g.coord(v) for v in np.flatnonzero(occupied).tolist()], fill)
    return sc.finish()
