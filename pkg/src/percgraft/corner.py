"""Biased corner percolation on rectangular windows of Z^2.

A configuration is a pair of sign sequences: ``xi`` indexed by columns and
``eta`` indexed by rows.  At vertex ``(x, y)`` with parity ``s = (x+y) % 2``
and ``sgn = +1`` if ``s`` is odd, ``-1`` if even:

* the vertical edge goes up when ``xi[x] * sgn == 1`` and down otherwise,
* the horizontal edge goes right when ``eta[y] * sgn == 1`` and left otherwise.

So every vertex has exactly one vertical and one horizontal open edge and
the open subgraph is 2-regular.  Horizontal edges read the *row* sign; a
column-indexed horizontal rule is not 2-regular.

Heights live on dual squares indexed by their bottom-left corner ``(n, m)``:
``H(n, m) = (X_n + Y_m + ((n + m) % 2)) / 2`` where ``X``, ``Y`` are the
walks of ``xi`` and ``eta`` anchored at ``X_0 = Y_0 = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .randomness import Streams, block_draw

__all__ = [
    "Window",
    "CornerConfig",
    "HeightField",
    "TracedPath",
    "InsufficientLength",
    "VerticalPath",
    "generate_corner",
    "resample_columns",
    "open_edges",
    "vertex_degrees",
    "degree_violations",
    "compute_height",
    "height_step_violations",
    "trace_path",
    "slope_statistic",
    "parity_check",
    "label_clusters",
    "spanning_clusters",
    "cluster_heights",
    "vertex_height",
    "height_constancy",
    "height_bijection_check",
    "SurgeryOutcome",
    "surgery_experiment",
    "sign_process",
    "successor_trace",
    "asymptotic_slope",
]


class InsufficientLength(ValueError):
    pass


class VerticalPath(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Vertices ``x0 <= x < x0 + width``, ``y0 <= y < y0 + height``."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("window must be non-empty")

    @classmethod
    def centered(cls, width, height):
        return cls(-(width // 2), -(height // 2), width, height)

    @property
    def x1(self):
        return self.x0 + self.width

    @property
    def y1(self):
        return self.y0 + self.height

    def contains(self, x, y) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1


def asymptotic_slope(p: float, q: float) -> float:
    return (2 * p - 1) / (1 - 2 * q)


def _signs(u, prob):
    return np.where(u < prob, 1, -1).astype(np.int8)


def _walk_value(streams, key, prob, n) -> int:
    """Anchored walk value at index ``n`` (sum of signs 1..n, or minus 0..n+1)."""
    if n == 0:
        return 0
    draw = lambda g, k: g.random(k)
    if n > 0:
        return int(_signs(block_draw(streams, key, 1, n + 1, draw), prob).sum(dtype=np.int64))
    return -int(_signs(block_draw(streams, key, n + 1, 1, draw), prob).sum(dtype=np.int64))


def _anchor_from_window(signs: np.ndarray, start: int) -> int:
    # walk value at ``start`` given the signs on [start, start + len)
    if start > 0:
        raise ValueError("window does not contain index 0; pass the anchor explicitly")
    if start + len(signs) <= 0:
        raise ValueError("window does not contain index 0; pass the anchor explicitly")
    return -int(signs[1:1 - start].sum(dtype=np.int64))


@dataclass(frozen=True, eq=False)
class CornerConfig:
    window: Window
    xi: np.ndarray = field(repr=False)    # int8, xi[i] is the sign of column x0 + i
    eta: np.ndarray = field(repr=False)   # int8, eta[j] is the sign of row y0 + j
    X0: int = 0                           # X at column x0
    Y0: int = 0                           # Y at row y0
    p: float = 0.5
    q: float = 0.5
    streams: Streams | None = None

    @classmethod
    def from_arrays(cls, xi, eta, x0=0, y0=0, X0=None, Y0=None, p=0.5, q=0.5):
        """Build a configuration from explicit signs (e.g. degenerate ones)."""
        xi = np.asarray(xi, dtype=np.int8)
        eta = np.asarray(eta, dtype=np.int8)
        if not (np.isin(xi, (-1, 1)).all() and np.isin(eta, (-1, 1)).all()):
            raise ValueError("signs must be +1 or -1")
        X0 = _anchor_from_window(xi, x0) if X0 is None else int(X0)
        Y0 = _anchor_from_window(eta, y0) if Y0 is None else int(Y0)
        return cls(Window(x0, y0, len(xi), len(eta)), xi, eta, X0, Y0, p, q)

    def xi_at(self, x):
        return int(self.xi[x - self.window.x0])

    def eta_at(self, y):
        return int(self.eta[y - self.window.y0])

    def step(self, x, y, horizontal: bool):
        """Open neighbour of ``(x, y)`` along the given axis."""
        sgn = 1 if (x + y) & 1 else -1
        if horizontal:
            return x + self.eta_at(y) * sgn, y
        return x, y + self.xi_at(x) * sgn


def generate_corner(window: Window, p: float, q: float, streams: Streams) -> CornerConfig:
    """Sample ``xi`` (column signs, P(+1)=p) and ``eta`` (row signs, P(+1)=q).

    Column ``x`` always reads the same uniform from stream ``("xi", x // BLOCK)``
    whatever the window, so windows and parameters are coupled.
    """
    if not (0 < p < 1 and 0 < q < 1):
        raise ValueError("p and q must lie in (0, 1)")
    draw = lambda g, k: g.random(k)
    xi = _signs(block_draw(streams, ("xi",), window.x0, window.x1, draw), p)
    eta = _signs(block_draw(streams, ("eta",), window.y0, window.y1, draw), q)
    X0 = _walk_value(streams, ("xi",), p, window.x0)
    Y0 = _walk_value(streams, ("eta",), q, window.y0)
    return CornerConfig(window, xi, eta, X0, Y0, p, q, streams)


def resample_columns(cfg: CornerConfig, c0: int, c1: int, streams: Streams,
                     p: float | None = None) -> CornerConfig:
    """Fresh ``xi`` on columns ``c0..c1`` (inclusive); everything else shared.

    An empty interval (``c1 < c0``) returns an identical configuration.
    """
    w = cfg.window
    if c1 < c0:
        return replace(cfg)
    if not (w.x0 <= c0 and c1 < w.x1):
        raise ValueError("resampling interval must lie inside the window")
    p = cfg.p if p is None else p
    fresh = _signs(streams("xi-resample", c0, c1).random(c1 - c0 + 1), p)
    xi = cfg.xi.copy()
    xi[c0 - w.x0:c1 - w.x0 + 1] = fresh
    # X at x0 only changes if the interval sits between column 0 and x0
    delta = xi.astype(np.int64) - cfg.xi
    cols = np.arange(w.x0, w.x1)
    if w.x0 > 0:
        shift = int(delta[(cols >= 1) & (cols <= w.x0)].sum())
    else:
        shift = -int(delta[(cols > w.x0) & (cols <= 0)].sum())
    return replace(cfg, xi=xi, X0=cfg.X0 + shift)


# -- edges and degrees -------------------------------------------------------

def _parity_sign(window: Window) -> np.ndarray:
    xs = np.arange(window.x0, window.x1)
    ys = np.arange(window.y0, window.y1)
    par = (ys[:, None] + xs[None, :]) & 1
    return (2 * par - 1).astype(np.int8)


def open_edges(cfg: CornerConfig):
    """Boolean arrays ``(horizontal, vertical)`` of open window edges.

    ``horizontal[j, i]`` is the edge from ``(x0+i, y0+j)`` to the right
    (shape ``(H, W-1)``); ``vertical[j, i]`` goes up from ``(x0+i, y0+j)``
    (shape ``(H-1, W)``).
    """
    sgn = _parity_sign(cfg.window)
    right = (cfg.eta[:, None] * sgn) == 1
    up = (cfg.xi[None, :] * sgn) == 1
    return right[:, :-1], up[:-1, :]


def vertex_degrees(cfg: CornerConfig) -> np.ndarray:
    """Degree of every window vertex in the window-restricted open graph."""
    h, v = open_edges(cfg)
    deg = np.zeros((cfg.window.height, cfg.window.width), dtype=np.int8)
    deg[:, :-1] += h
    deg[:, 1:] += h
    deg[:-1, :] += v
    deg[1:, :] += v
    return deg


def degree_violations(cfg: CornerConfig) -> int:
    """Number of interior vertices whose degree is not exactly 2."""
    deg = vertex_degrees(cfg)
    return int(np.count_nonzero(deg[1:-1, 1:-1] != 2))


# -- heights -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HeightField:
    """Heights of the dual squares around a window.

    ``H[j, i]`` is the height of the square whose bottom-left corner is
    ``(x0 - 1 + i, y0 - 1 + j)``, so every window vertex has all four of
    its surrounding squares available.
    """

    window: Window
    X: np.ndarray   # X at columns x0-1 .. x1-1
    Y: np.ndarray   # Y at rows y0-1 .. y1-1
    H: np.ndarray   # shape (height + 1, width + 1)

    def at(self, n, m) -> int:
        """Height of the dual square with bottom-left corner ``(n, m)``."""
        return int(self.H[m - self.window.y0 + 1, n - self.window.x0 + 1])

    @property
    def northeast(self) -> np.ndarray:
        """``H(v + (1/2, 1/2))`` for every window vertex ``v``."""
        return self.H[1:, 1:]

    def vertex_heights(self) -> np.ndarray:
        """Height of the cluster through each window vertex.

        The black squares (even bottom-left corner) sharing an open edge
        with a cluster all carry the same height, one less than the white
        squares on its other side.  At a vertex the two black squares of its
        four are either both on that side or one of them sits diagonally on
        the white side with height one more, hence the minimum.
        """
        H = self.H
        ne, sw = H[1:, 1:], H[:-1, :-1]
        nw, se = H[1:, :-1], H[:-1, 1:]
        w = self.window
        even = ((np.arange(w.y0, w.y1)[:, None] + np.arange(w.x0, w.x1)[None, :]) & 1) == 0
        return np.where(even, np.minimum(ne, sw), np.minimum(nw, se))


def compute_height(cfg: CornerConfig) -> HeightField:
    w = cfg.window
    Xm1 = cfg.X0 - int(cfg.xi[0])     # X at x0 - 1
    Ym1 = cfg.Y0 - int(cfg.eta[0])
    X = Xm1 + np.concatenate([[0], np.cumsum(cfg.xi, dtype=np.int64)])
    Y = Ym1 + np.concatenate([[0], np.cumsum(cfg.eta, dtype=np.int64)])
    par = (np.arange(w.y0 - 1, w.y1)[:, None] + np.arange(w.x0 - 1, w.x1)[None, :]) & 1
    twice = Y[:, None] + X[None, :] + par
    if np.any(twice & 1):
        raise AssertionError("non-integer height; walk anchors are inconsistent")
    return HeightField(w, X, Y, twice // 2)


def height_step_violations(cfg: CornerConfig, hf: HeightField | None = None) -> dict:
    """Check the height rule on every interior edge of the window.

    Squares on either side of a closed edge must have equal height.  An open
    edge separates a black square (even bottom-left) from a white one and
    the white one must be exactly 1 higher.
    """
    hf = hf or compute_height(cfg)
    H = hf.northeast
    right, up = open_edges(cfg)
    w = cfg.window
    par = ((np.arange(w.y0, w.y1)[:, None] + np.arange(w.x0, w.x1)[None, :]) & 1).astype(bool)
    # vertical edge at (x, y) separates squares (x-1, y) and (x, y)
    ve = up[:, 1:]
    left_sq, right_sq = H[:-1, :-1], H[:-1, 1:]
    black_left = ~par[:-1, :-1]
    diff = np.where(black_left, right_sq - left_sq, left_sq - right_sq)
    v_bad = np.count_nonzero(np.where(ve, diff != 1, right_sq != left_sq))
    # horizontal edge at (x, y) separates squares (x, y-1) and (x, y)
    he = right[1:, :]
    low_sq, high_sq = H[:-1, :-1], H[1:, :-1]
    black_low = ~par[:-1, :-1]
    diff = np.where(black_low, high_sq - low_sq, low_sq - high_sq)
    h_bad = np.count_nonzero(np.where(he, diff != 1, high_sq != low_sq))
    return {"vertical_edge_violations": int(v_bad),
            "horizontal_edge_violations": int(h_bad),
            "checked_edges": int(ve.size + he.size)}


# -- paths -------------------------------------------------------------------

SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True, eq=False)
class TracedPath:
    """A window-restricted cluster traced vertex by vertex.

    When the path is oriented, ``vertices`` runs in the positive direction
    (first coordinate increasing from the first to the last vertex).
    """

    vertices: np.ndarray          # (k, 2) int64
    closed: bool
    exits: tuple                  # window sides left through, one per open end
    oriented: bool

    def __len__(self):
        return len(self.vertices)

    @property
    def steps(self) -> np.ndarray:
        if self.closed:
            v = np.vstack([self.vertices, self.vertices[:1]])
        else:
            v = self.vertices
        return np.diff(v, axis=0)

    @property
    def edge_signs(self) -> np.ndarray:
        """+1 for an edge going up or right along the stored order, else -1."""
        return self.steps.sum(axis=1).astype(np.int8)

    @property
    def horizontal_steps(self) -> np.ndarray:
        return self.steps[:, 0] != 0

    def spans(self, a="left", b="right") -> bool:
        return not self.closed and {a, b} <= set(self.exits)

    @property
    def displacement(self) -> tuple:
        d = self.vertices[-1] - self.vertices[0]
        return int(d[0]), int(d[1])


def _walk_out(cfg: CornerConfig, sx, sy, horizontal):
    """Follow open edges from ``(sx, sy)`` starting along ``horizontal``.

    Returns ``(visited, end)`` where ``end`` is ``"loop"`` or the side of
    the window the next step would leave through.
    """
    w = cfg.window
    x0, y0, x1, y1 = w.x0, w.y0, w.x1, w.y1
    xi = cfg.xi.tolist()
    eta = cfg.eta.tolist()
    out = []
    x, y = sx, sy
    horiz = horizontal
    while True:
        sgn = 1 if (x + y) & 1 else -1
        if horiz:
            nx, ny = x + eta[y - y0] * sgn, y
        else:
            nx, ny = x, y + xi[x - x0] * sgn
        if nx < x0:
            return out, "left"
        if nx >= x1:
            return out, "right"
        if ny < y0:
            return out, "bottom"
        if ny >= y1:
            return out, "top"
        if nx == sx and ny == sy:
            return out, "loop"
        out.append((nx, ny))
        x, y = nx, ny
        horiz = not horiz


def trace_path(cfg: CornerConfig, v) -> TracedPath:
    """Maximal window path (or finite loop) through vertex ``v = (x, y)``."""
    sx, sy = v
    if not cfg.window.contains(sx, sy):
        raise ValueError(f"{v} is outside the window")
    fwd, end_f = _walk_out(cfg, sx, sy, True)
    if end_f == "loop":
        pts = [(sx, sy)] + fwd
        return TracedPath(np.array(pts, dtype=np.int64), True, (), False)
    back, end_b = _walk_out(cfg, sx, sy, False)
    pts = back[::-1] + [(sx, sy)] + fwd
    verts = np.array(pts, dtype=np.int64)
    exits = (end_b, end_f)
    dx = verts[-1, 0] - verts[0, 0]
    if dx < 0:
        verts = verts[::-1].copy()
        exits = exits[::-1]
    return TracedPath(verts, False, exits, bool(dx != 0))


def slope_statistic(path: TracedPath, min_length: int = 1000) -> float:
    """Slope of the chord joining the two ends of an open path."""
    if path.closed or len(path) - 1 < min_length:
        raise InsufficientLength(
            f"path has {len(path) - 1} steps, at least {min_length} required")
    dx, dy = path.displacement
    if dx == 0:
        raise VerticalPath("ends share the same column (vertical regime)")
    return dy / dx


def parity_check(cfg: CornerConfig, path: TracedPath) -> dict:
    """Axis of the positive-direction outgoing edge at even and odd vertices.

    ``expected_even_axis`` is horizontal when ``q > 1/2`` and vertical when
    ``q < 1/2``; ``violations`` counts even vertices that disagree.  Finite
    loops and unoriented paths are excluded (``checked`` is False).
    """
    if cfg.q == 0.5:
        raise ValueError("the parity statement needs q != 1/2")
    report = {"checked": False, "even_horizontal": 0, "even_vertical": 0,
              "odd_horizontal": 0, "odd_vertical": 0,
              "expected_even_axis": "horizontal" if cfg.q > 0.5 else "vertical",
              "violations": 0}
    if path.closed or not path.oriented:
        return report
    verts = path.vertices[:-1]
    horiz = path.horizontal_steps
    even = ((verts[:, 0] + verts[:, 1]) & 1) == 0
    report["checked"] = True
    report["even_horizontal"] = int(np.count_nonzero(even & horiz))
    report["even_vertical"] = int(np.count_nonzero(even & ~horiz))
    report["odd_horizontal"] = int(np.count_nonzero(~even & horiz))
    report["odd_vertical"] = int(np.count_nonzero(~even & ~horiz))
    if cfg.q > 0.5:
        report["violations"] = report["even_vertical"]
    else:
        report["violations"] = report["even_horizontal"]
    return report


# -- clusters on the window --------------------------------------------------

def label_clusters(cfg: CornerConfig) -> tuple[int, np.ndarray]:
    """Connected components of the window's open subgraph (labels ``(H, W)``)."""
    w = cfg.window
    right, up = open_edges(cfg)
    ids = np.arange(w.width * w.height).reshape(w.height, w.width)
    src = np.concatenate([ids[:, :-1][right], ids[:-1, :][up]])
    dst = np.concatenate([ids[:, 1:][right], ids[1:, :][up]])
    n = w.width * w.height
    adj = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    k, labels = connected_components(adj, directed=False)
    return k, labels.reshape(w.height, w.width)


def _contacts(labels: np.ndarray, k: int) -> dict:
    out = {}
    for side, sl in (("left", labels[:, 0]), ("right", labels[:, -1]),
                     ("bottom", labels[0, :]), ("top", labels[-1, :])):
        mask = np.zeros(k, dtype=bool)
        mask[sl] = True
        out[side] = mask
    return out


def spanning_clusters(cfg: CornerConfig, labels=None, k=None, axis="horizontal"):
    """Labels of clusters treated as window proxies for infinite clusters.

    ``axis="horizontal"``: touches the left and right sides.
    ``axis="vertical"``: touches the bottom and top sides.
    ``axis="crossing"``: touches two distinct sides and its bounding box
    spans at least half the shorter window side.  Slope-1 paths in a
    square window rarely touch both left and right, so this is the mode
    used for height statistics.
    """
    if labels is None:
        k, labels = label_clusters(cfg)
    c = _contacts(labels, k)
    if axis == "horizontal":
        span = c["left"] & c["right"]
    elif axis == "vertical":
        span = c["bottom"] & c["top"]
    elif axis == "crossing":
        sides = sum(c[s].astype(np.int8) for s in SIDES)
        ny, nx = labels.shape
        rows = np.repeat(np.arange(ny), nx)
        cols = np.tile(np.arange(nx), ny)
        flat = labels.ravel()
        xmin, xmax = np.full(k, nx), np.full(k, -1)
        ymin, ymax = np.full(k, ny), np.full(k, -1)
        np.minimum.at(xmin, flat, cols)
        np.maximum.at(xmax, flat, cols)
        np.minimum.at(ymin, flat, rows)
        np.maximum.at(ymax, flat, rows)
        extent = np.maximum(xmax - xmin, ymax - ymin)
        span = (sides >= 2) & (extent >= min(nx, ny) // 2)
    else:
        raise ValueError(f"unknown spanning axis {axis!r}")
    return np.flatnonzero(span), labels, k


def _per_label_min_max(labels, values, mask, k):
    lab = labels[mask]
    val = values[mask]
    lo = np.full(k, np.iinfo(np.int64).max)
    hi = np.full(k, np.iinfo(np.int64).min)
    np.minimum.at(lo, lab, val)
    np.maximum.at(hi, lab, val)
    return lo, hi


def cluster_heights(cfg: CornerConfig, hf=None, labels=None, k=None, read="adjacent",
                    parity="even"):
    """Per-cluster min and max of vertex heights.

    ``read="adjacent"`` uses :meth:`HeightField.vertex_heights`;
    ``read="northeast"`` uses the square ``v + (1/2, 1/2)``.  ``parity``
    selects the vertices read: ``"even"``, ``"odd"`` or ``"all"``.
    """
    hf = hf or compute_height(cfg)
    if labels is None:
        k, labels = label_clusters(cfg)
    w = cfg.window
    par = (np.arange(w.y0, w.y1)[:, None] + np.arange(w.x0, w.x1)[None, :]) & 1
    mask = {"even": par == 0, "odd": par == 1, "all": np.ones_like(par, dtype=bool)}[parity]
    values = hf.vertex_heights() if read == "adjacent" else hf.northeast
    return _per_label_min_max(labels, values, mask, k)


def height_constancy(cfg: CornerConfig, hf=None, interior_only=True, read="adjacent",
                     parity="even") -> dict:
    """Vertices of each cluster must share one height.

    With ``interior_only`` only clusters that never touch the window
    boundary (finite loops fully inside) are examined.
    """
    hf = hf or compute_height(cfg)
    k, labels = label_clusters(cfg)
    lo, hi = cluster_heights(cfg, hf, labels, k, read=read, parity=parity)
    present = lo <= hi
    if interior_only:
        c = _contacts(labels, k)
        present &= ~(c["left"] | c["right"] | c["bottom"] | c["top"])
    bad = present & (lo != hi)
    return {"clusters_checked": int(present.sum()), "violations": int(bad.sum())}


def height_bijection_check(cfg: CornerConfig, axis="crossing") -> dict:
    """Distinct spanning clusters must carry distinct heights."""
    if cfg.p == 0.5 and cfg.q == 0.5:
        raise ValueError("height bijection needs (p, q) != (1/2, 1/2)")
    hf = compute_height(cfg)
    span, labels, k = spanning_clusters(cfg, axis=axis)
    lo, hi = cluster_heights(cfg, hf, labels, k)
    heights = {}
    non_constant = []
    for lab in span.tolist():
        if lo[lab] != hi[lab]:
            non_constant.append(lab)
        heights.setdefault(int(lo[lab]), []).append(lab)
    collisions = {h: labs for h, labs in heights.items() if len(labs) > 1}
    return {"spanning": int(len(span)), "heights": sorted(heights),
            "collisions": collisions, "non_constant": non_constant,
            "injective": not collisions and not non_constant}


# -- surgery -----------------------------------------------------------------

@dataclass
class SurgeryOutcome:
    config: CornerConfig
    resampled: CornerConfig
    interval: tuple
    locality_ok: bool
    designated: tuple | None      # ((x, y) left end of path 1, (x, y) right end of path 2)
    heights_before: tuple | None
    heights_after: tuple | None
    merged: bool
    heights_match: bool


def _edges_outside_equal(a: CornerConfig, b: CornerConfig, c0, c1) -> bool:
    ha, va = open_edges(a)
    hb, vb = open_edges(b)
    cols = np.arange(a.window.x0, a.window.x1)
    outside = (cols < c0) | (cols > c1)
    return bool(np.array_equal(ha, hb) and np.array_equal(va[:, outside], vb[:, outside]))


def vertex_height(hf: HeightField, v) -> int:
    """Height of the cluster through the single vertex ``v``."""
    x, y = v
    if (x + y) % 2 == 0:
        return min(hf.at(x, y), hf.at(x - 1, y - 1))
    return min(hf.at(x - 1, y), hf.at(x, y - 1))


def surgery_experiment(cfg: CornerConfig, interval, streams: Streams,
                       p: float | None = None) -> SurgeryOutcome:
    """Resample ``xi`` on the column interval and test whether two spanning
    paths of ``cfg`` end up joined.

    The designated pair is the two horizontally spanning clusters whose
    heights are closest (ties: lowest heights).  Path 1 contributes its left
    end, path 2 its right end; both lie outside the interval columns, so
    their tails survive the resampling.  ``merged`` is decided by tracing
    the resampled configuration from path 1's left end; ``heights_match``
    compares the two tails' heights after resampling.
    """
    c0, c1 = interval
    new = resample_columns(cfg, c0, c1, streams, p=p)
    locality = _edges_outside_equal(cfg, new, c0, c1)
    hf = compute_height(cfg)
    span, labels, k = spanning_clusters(cfg)
    if len(span) < 2:
        return SurgeryOutcome(cfg, new, (c0, c1), locality, None, None, None, False, False)
    lo, _ = cluster_heights(cfg, hf, labels, k)
    hs = sorted((int(lo[s]), int(s)) for s in span)
    gaps = [(hs[i + 1][0] - hs[i][0], i) for i in range(len(hs) - 1)]
    _, i = min(gaps)
    lab1, lab2 = hs[i][1], hs[i + 1][1]
    w = cfg.window
    # pick the lower-height cluster's left end and the other's right end
    rows1 = np.flatnonzero(labels[:, 0] == lab1)
    rows2 = np.flatnonzero(labels[:, -1] == lab2)
    a = (w.x0, w.y0 + int(rows1[0]))
    b = (w.x1 - 1, w.y0 + int(rows2[0]))
    p1 = trace_path(cfg, a)
    p2 = trace_path(cfg, b)
    hf_new = compute_height(new)
    tail1 = [tuple(v) for v in p1.vertices if v[0] < c0]
    tail2 = [tuple(v) for v in p2.vertices if v[0] > c1]
    before = (vertex_height(hf, tail1[0]), vertex_height(hf, tail2[-1]))
    after = (vertex_height(hf_new, tail1[0]), vertex_height(hf_new, tail2[-1]))
    traced = trace_path(new, a)
    merged = bool(np.any((traced.vertices[:, 0] == b[0]) & (traced.vertices[:, 1] == b[1])))
    return SurgeryOutcome(cfg, new, (c0, c1), locality, (a, b), before, after,
                          merged, after[0] == after[1])


# -- sign process and orbit traces -------------------------------------------

def sign_process(path: TracedPath, anchor=None) -> dict:
    """``sgn(e_{2i})`` along an oriented path, starting at ``anchor``.

    ``e_0`` is the edge leaving ``anchor`` in the positive direction (default
    anchor: the first vertex).  Returns the sequence and its running means.
    """
    if path.closed or not path.oriented:
        raise ValueError("sign process needs an oriented open path")
    start = 0
    if anchor is not None:
        hits = np.flatnonzero((path.vertices[:, 0] == anchor[0]) & (path.vertices[:, 1] == anchor[1]))
        if not len(hits):
            raise ValueError(f"{anchor} is not on the path")
        start = int(hits[0])
    signs = path.edge_signs[start:]
    seq = signs[::2].astype(np.int64)
    running = np.cumsum(seq) / np.arange(1, len(seq) + 1)
    return {"signs": seq, "running_mean": running,
            "mean": float(running[-1]) if len(running) else float("nan")}


def successor_trace(path: TracedPath, start=None, step: int = 1) -> np.ndarray:
    """Orbit ``v, pi(v), pi^2(v), ...`` of the map sending a vertex ``step``
    vertices ahead along the path (positive direction, cyclic on loops)."""
    verts = path.vertices
    i0 = 0
    if start is not None:
        hits = np.flatnonzero((verts[:, 0] == start[0]) & (verts[:, 1] == start[1]))
        i0 = int(hits[0])
    if path.closed:
        idx = (i0 + step * np.arange(len(verts))) % len(verts)
    else:
        idx = np.arange(i0, len(verts), step)
    return verts[idx]
