import numpy as np
import pytest
from hypothesis import given, strategies as st

from percgraft.lattice import (EscapesWindow, HORIZONTAL, VERTICAL, ball, build_lattice,
                               translate, translate_ids)


def _bfs_ball(g, v, r):
    # independent oracle: distances by repeated frontier expansion over the edge list
    dist = {v: 0}
    frontier = {v}
    for d in range(1, r + 1):
        nxt = set()
        for a, b in g.edges.tolist():
            if a in frontier and b not in dist:
                nxt.add(b)
            if b in frontier and a not in dist:
                nxt.add(a)
        for u in nxt:
            dist[u] = d
        frontier = nxt
    return set(dist)


def test_counts():
    g = build_lattice("z2_torus", [4, 4], "periodic")
    assert (g.vertex_count, g.edge_count) == (16, 32)
    assert np.all(g.degrees() == 4)
    g = build_lattice("path", [5])
    assert (g.vertex_count, g.edge_count) == (5, 4)
    g = build_lattice("z2_window", [5, 3])
    assert g.edge_count == 4 * 3 + 5 * 2
    g = build_lattice("tree", [3, 2])
    assert g.vertex_count == 1 + 3 + 6 and g.edge_count == 9


def test_hex_patch_degrees():
    g = build_lattice("hex_patch", [3, 3])
    deg = g.degrees().reshape(3, 3)
    assert deg[1, 1] == 3
    g = build_lattice("hex_patch", [12, 10])
    deg = g.degrees().reshape(10, 12)
    assert np.all(deg[1:-1, 1:-1] == 3)
    # every hexagon face is a 6-cycle of distinct edges
    for f in g.faces():
        assert len(set(f)) == 6


def test_single_hexagon():
    g = build_lattice("hex_patch", [3, 2])
    assert g.edge_count == 6 and len(g.faces()) == 1
    assert sorted(g.faces()[0]) == list(range(6))
    assert np.all(g.degrees() == 2)


def test_orientation():
    g = build_lattice("z2_window", [3, 3])
    for (u, v), o in zip(g.edges.tolist(), g.orientation.tolist()):
        (x0, y0), (x1, y1) = g.coord(u), g.coord(v)
        assert o == (HORIZONTAL if y0 == y1 else VERTICAL)


@pytest.mark.parametrize("kind,dims,boundary", [
    ("z2_torus", [4, 4], "free"),
    ("z2_torus", [2, 5], "periodic"),
    ("tree", [3, 2], "periodic"),
    ("z2_window", [4, 4], "periodic"),
    ("z2_window", [0, 4], "free"),
    ("z2_window", [2**16, 2**16], "free"),
    ("path", [2], "periodic"),
])
def test_invalid_specs(kind, dims, boundary):
    with pytest.raises(ValueError):
        build_lattice(kind, dims, boundary)


def test_translate():
    g = build_lattice("z2_torus", [4, 4], "periodic")
    assert translate(g, (3, 3), (1, 1)) == (0, 0)
    assert translate(g, g.vid(3, 3), (1, 1)) == g.vid(0, 0)
    w = build_lattice("z2_window", [4, 4])
    assert translate(w, (0, 0), (0, 0)) == (0, 0)
    with pytest.raises(EscapesWindow):
        translate(w, (3, 3), (1, 0))
    assert translate(w, (3, 3), (1, 0), clip=True) is None


def test_torus_edge_set_shift_invariant():
    g = build_lattice("z2_torus", [4, 4], "periodic")
    edges = {frozenset(e) for e in g.edges.tolist()}
    shifted = {frozenset(translate_ids(g, np.array(e), (2, 1)).tolist()) for e in g.edges.tolist()}
    assert shifted == edges


@given(st.integers(3, 20), st.integers(3, 20), st.data())
def test_coord_roundtrip(w, h, data):
    g = build_lattice("z2_window", [w, h])
    v = data.draw(st.integers(0, w * h - 1))
    assert g.vid(*g.coord(v)) == v


def test_ball():
    g = build_lattice("z2_window", [7, 7])
    v = g.vid(3, 3)
    assert ball(g, v, 0) == {v}
    assert ball(g, v, 1) == {v, g.vid(2, 3), g.vid(4, 3), g.vid(3, 2), g.vid(3, 4)}
    t = build_lattice("z2_torus", [9, 9], "periodic")
    assert len(ball(t, 0, 2)) == 13
    h = build_lattice("hex_patch", [10, 10])
    c = h.vid(5, 5)
    assert ball(h, c, 2) == _bfs_ball(h, c, 2)
    with pytest.raises(ValueError):
        ball(g, v, -1)


def test_edge_id_and_faces():
    g = build_lattice("z2_torus", [4, 4], "periodic")
    for i, (a, b) in enumerate(g.edges.tolist()):
        assert g.edge_id(b, a) == i
    assert len(g.faces()) == 16
    w = build_lattice("z2_window", [4, 3])
    assert len(w.faces()) == 3 * 2
    with pytest.raises(KeyError):
        w.edge_id(0, 5)
