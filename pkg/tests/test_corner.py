import numpy as np
import pytest

from percgraft import corner
from percgraft.randomness import Streams


def _staircase(size=9):
    # all signs +1: even vertices open left and down, odd ones right and up
    h = size // 2
    return corner.CornerConfig.from_arrays(np.ones(size), np.ones(size), -h, -h, p=1.0, q=1.0)


def test_staircase_edges_and_path():
    cfg = _staircase()
    assert cfg.step(0, 0, True) == (-1, 0)
    assert cfg.step(0, 0, False) == (0, -1)
    path = corner.trace_path(cfg, (0, 0))
    verts = [tuple(v) for v in path.vertices.tolist()]
    i = verts.index((-1, 0))
    assert verts[i:i + 5] == [(-1, 0), (0, 0), (0, -1), (1, -1), (1, -2)]
    assert path.oriented and not path.closed and len(set(path.exits)) == 2
    dx, dy = path.displacement
    assert dy / dx == -1


def test_staircase_heights():
    cfg = _staircase()
    hf = corner.compute_height(cfg)
    assert hf.at(0, 0) == 0          # square centred at (1/2, 1/2)
    assert hf.at(1, -1) == 0         # square centred at (3/2, -1/2)
    assert corner.vertex_height(hf, (0, 0)) == -1
    hv = hf.vertex_heights()
    w = cfg.window
    assert hv[0 - w.y0, 0 - w.x0] == -1
    assert corner.height_step_violations(cfg, hf)["vertical_edge_violations"] == 0
    # every vertex of one staircase path carries the same height
    path = corner.trace_path(cfg, (0, 0))
    assert {corner.vertex_height(hf, tuple(v)) for v in path.vertices.tolist()} == {-1}


def test_staircase_sign_process():
    path = corner.trace_path(_staircase(41), (0, 0))
    sp = corner.sign_process(path)
    assert set(sp["signs"].tolist()) == {-1} and sp["mean"] == -1
    # alternate edges go right (+1) and down (-1)
    assert set(path.edge_signs[1::2].tolist()) | set(path.edge_signs[::2].tolist()) == {-1, 1}


def test_degree_two_and_heights_on_random_windows():
    for s in range(5):
        cfg = corner.generate_corner(corner.Window(3, -7, 60, 45), 0.3, 0.7, Streams(s))
        assert corner.degree_violations(cfg) == 0
        step = corner.height_step_violations(cfg)
        assert step["vertical_edge_violations"] == step["horizontal_edge_violations"] == 0
        assert corner.height_constancy(cfg)["violations"] == 0


def test_window_coupling():
    # a sub-window reads exactly the same signs as the big window
    st = Streams(11)
    big = corner.generate_corner(corner.Window(-5000, -40, 10000, 80), 0.4, 0.6, st)
    small = corner.generate_corner(corner.Window(4000, -10, 30, 20), 0.4, 0.6, st)
    off = 4000 - big.window.x0
    assert np.array_equal(small.xi, big.xi[off:off + 30])
    hb, hs = corner.compute_height(big), corner.compute_height(small)
    assert hs.at(4010, 0) == hb.at(4010, 0)


def test_literal_northeast_read_fails_on_unit_loops():
    # a unit 4-loop: the even vertex with corner (left, down) sees the white
    # square to its north-east, one higher than the cluster
    cfg = corner.CornerConfig.from_arrays([1, -1, 1, -1], [1, -1, 1, -1], 0, 0, p=0.5, q=0.5)
    k, labels = corner.label_clusters(cfg)
    lit = corner.height_constancy(cfg, read="northeast", interior_only=False)
    fixed = corner.height_constancy(cfg, interior_only=False)
    assert fixed["violations"] == 0
    hf = corner.compute_height(cfg)
    # find a closed unit loop and check the two even vertices' north-east squares differ
    for x in range(4):
        for y in range(4):
            path = corner.trace_path(cfg, (x, y))
            if path.closed and len(path) == 4:
                evens = [tuple(v) for v in path.vertices.tolist() if sum(v) % 2 == 0]
                ne = {hf.at(*v) for v in evens}
                assert len(ne) == 2 and lit["violations"] > 0
                return
    pytest.fail("no unit loop in the test configuration")


def test_corrected_parity_statement():
    """Odd vertices take the axis the stated lemma assigns to even ones."""
    for p, q in ((0.2, 0.8), (0.8, 0.2)):
        for s in range(3):
            cfg = corner.generate_corner(corner.Window.centered(400, 1200), p, q,
                                         Streams(s, ("odd-parity", q)))
            found = 0
            for y in range(-100, 100):
                path = corner.trace_path(cfg, (cfg.window.x0, y))
                if not path.spans("left", "right"):
                    continue
                rep = corner.parity_check(cfg, path)
                if q > 0.5:
                    assert rep["odd_vertical"] == 0 and rep["odd_horizontal"] > 0
                else:
                    assert rep["odd_horizontal"] == 0 and rep["odd_vertical"] > 0
                found += 1
            assert found > 0


def test_parity_check_rejects_symmetric_q():
    cfg = corner.generate_corner(corner.Window.centered(20, 20), 0.5, 0.5, Streams(0))
    with pytest.raises(ValueError):
        corner.parity_check(cfg, corner.trace_path(cfg, (0, 0)))


def test_slope_statistic_errors():
    cfg = _staircase(9)
    path = corner.trace_path(cfg, (0, 0))
    with pytest.raises(corner.InsufficientLength):
        corner.slope_statistic(path, min_length=1000)
    zigzag = np.array([(0, 0), (1, 0), (1, 1), (0, 1), (0, 2)])
    path = corner.TracedPath(zigzag, False, ("bottom", "top"), False)
    with pytest.raises(corner.VerticalPath):
        corner.slope_statistic(path, min_length=1)


def test_path_never_repeats_an_edge():
    cfg = corner.generate_corner(corner.Window.centered(200, 200), 0.3, 0.6, Streams(4))
    for y in range(-20, 20, 3):
        path = corner.trace_path(cfg, (0, y))
        v = path.vertices.tolist()
        seq = v + v[:1] if path.closed else v
        edges = {frozenset(map(tuple, (a, b))) for a, b in zip(seq, seq[1:])}
        assert len(edges) == len(seq) - 1
        assert np.all(np.abs(path.steps).sum(axis=1) == 1)
        # alternating axes
        h = path.horizontal_steps
        assert np.all(h[1:] != h[:-1])


def test_resample_locality_and_empty_interval():
    cfg = corner.generate_corner(corner.Window(-50, -50, 100, 100), 0.4, 0.7, Streams(9))
    same = corner.resample_columns(cfg, 5, 4, Streams(1))
    assert np.array_equal(same.xi, cfg.xi) and same.X0 == cfg.X0
    new = corner.resample_columns(cfg, -10, 10, Streams(1))
    inside = slice(-10 + 50, 10 + 50 + 1)
    outside = np.ones(100, bool)
    outside[inside] = False
    assert np.array_equal(new.xi[outside], cfg.xi[outside])
    assert corner._edges_outside_equal(cfg, new, -10, 10)
    assert corner.degree_violations(new) == 0
    step = corner.height_step_violations(new)
    assert step["vertical_edge_violations"] + step["horizontal_edge_violations"] == 0
    with pytest.raises(ValueError):
        corner.resample_columns(cfg, -60, 0, Streams(1))


def test_resample_left_of_origin_keeps_anchor():
    # X is anchored at column 0; resampling columns left of the window origin
    # shifts X0 so that X(0) stays 0
    cfg = corner.generate_corner(corner.Window(5, 0, 50, 10), 0.4, 0.6, Streams(2))
    new = corner.resample_columns(cfg, 10, 20, Streams(3))
    assert new.X0 == cfg.X0
    cfg = corner.generate_corner(corner.Window(-30, 0, 50, 10), 0.4, 0.6, Streams(2))
    new = corner.resample_columns(cfg, -20, -10, Streams(3))
    hf = corner.compute_height(new)
    assert hf.X[-(-30) + 1] == 0    # X at column 0


def test_generate_validation():
    with pytest.raises(ValueError):
        corner.generate_corner(corner.Window(0, 0, 5, 5), 0.0, 0.5, Streams(0))
    with pytest.raises(ValueError):
        corner.Window(0, 0, 0, 5)
    with pytest.raises(ValueError):
        corner.CornerConfig.from_arrays([1, 0], [1, 1])


def test_successor_trace_on_loop():
    cfg = corner.CornerConfig.from_arrays([1, -1, 1, -1], [1, -1, 1, -1], 0, 0)
    for x in range(4):
        path = corner.trace_path(cfg, (x, 1))
        if path.closed:
            orb = corner.successor_trace(path, step=1)
            assert len(orb) == len(path)
            assert np.array_equal(corner.successor_trace(path, step=len(path))[1], path.vertices[0])
            return
    pytest.fail("no loop")


def test_surgery_experiment_reports_locality():
    seen = 0
    for s in range(20):
        cfg = corner.generate_corner(corner.Window(-32, 0, 64, 192), 0.2, 0.8, Streams(s))
        out = corner.surgery_experiment(cfg, (0, 6), Streams(s, ("surgery",)))
        assert out.locality_ok
        if out.designated is not None:
            seen += 1
            # joined tails necessarily carry one height
            assert out.heights_match or not out.merged
    assert seen > 0
