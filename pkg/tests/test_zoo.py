import math

import numpy as np
import pytest

from percgraft import zoo
from percgraft.lattice import build_lattice
from percgraft.randomness import Streams

TORUS = build_lattice("z2_torus", [32, 32], "periodic")


def test_zero_intensity_is_empty():
    cfg = zoo.generate_zoo(TORUS, 0.0, zoo.RandomWalkWorm(0.3), Streams(0))
    assert not cfg.occupancy.any() and cfg.counts.sum() == 0
    with pytest.raises(ValueError):
        zoo.generate_zoo(TORUS, -1.0, zoo.Singleton(), Streams(0))
    with pytest.raises(ValueError):
        zoo.generate_zoo(build_lattice("path", [5]), 1.0, zoo.Singleton(), Streams(0))


def test_parse_animal():
    assert isinstance(zoo.parse_animal("singleton"), zoo.Singleton)
    shape = zoo.parse_animal("shape:0,0;1,0;1,1")
    assert shape.mean_size() == 3
    worm = zoo.parse_animal("worm:geom:0.25:40")
    assert worm.p == 0.25 and worm.cap == 40
    assert zoo.parse_animal("worm:geom:0.5").cap == 200
    assert zoo.parse_animal("box:2:3") == zoo.Box(2, 3)
    for bad in ("dragon", "worm:geom:1.5", "shape:0,0;2,0", "box:3:2", "shape:1,0"):
        with pytest.raises(ValueError):
            zoo.parse_animal(bad)
    for d in (zoo.Singleton(), shape, worm, zoo.Box(1, 2)):
        assert str(zoo.parse_animal(str(d))) == str(d)


def test_random_animals_are_connected_and_rooted():
    rng = np.random.default_rng(0)
    for dist in (zoo.RandomWalkWorm(0.1, 30), zoo.Box(1, 4)):
        for _ in range(50):
            s = dist.sample(rng)
            assert zoo._connected(s) and (s == 0).all(axis=1).any()
            assert np.abs(s).max() <= dist.max_extent


def test_worm_tail_mass():
    w = zoo.RandomWalkWorm(0.1, 20)
    assert w.tail_mass == pytest.approx(0.9**20)
    rng = np.random.default_rng(1)
    hits = np.mean([min(int(rng.geometric(0.1)), 20) == 20 for _ in range(20000)])
    assert abs(hits - (w.tail_mass + 0.1 * 0.9**19)) < 0.01


def test_singleton_occupancy_and_counts():
    cfg = zoo.generate_zoo(TORUS, 0.4, zoo.Singleton(), Streams(3))
    assert np.array_equal(cfg.occupancy, cfg.counts > 0)
    # counts are Poisson(lambda): mean and variance both near lambda
    counts = np.concatenate([zoo.generate_zoo(TORUS, 0.4, zoo.Singleton(), Streams(s)).counts
                             for s in range(20)])
    assert abs(counts.mean() - 0.4) < 4 * math.sqrt(0.4 / counts.size)
    assert abs(counts.var() - 0.4) < 0.03


def test_monotone_coupling():
    worm = zoo.RandomWalkWorm(0.2, 30)
    for s in range(5):
        st = Streams(s)
        prev = None
        for lam in (0.01, 0.05, 0.1, 0.3):
            cfg = zoo.generate_zoo(TORUS, lam, worm, st)
            if prev is not None:
                assert np.all(cfg.occupancy >= prev.occupancy)
                assert np.all(cfg.counts >= prev.counts)
            prev = cfg


def test_window_clipping_is_audited():
    g = build_lattice("z2_window", [10, 10])
    cfg = zoo.generate_zoo(g, 0.5, zoo.Box(3, 3), Streams(0), audit=True)
    assert cfg.clipped == sum(c for _, _, c in cfg.log) > 0
    assert zoo.interior_mask(g, 2).sum() == 4 * 4   # x, y in 3..6


def test_surgery_is_a_superset_and_connects_path():
    g = build_lattice("z2_window", [20, 20])
    cfg = zoo.generate_zoo(g, 0.05, zoo.Singleton(), Streams(2))
    path = [g.vid(x, 10) for x in range(3, 17)]
    new = zoo.insert_animal_surgery(g, cfg, path, zoo.Singleton(), Streams(2))
    assert np.all(new.occupancy >= cfg.occupancy)
    assert np.array_equal(new.counts - cfg.counts, np.isin(np.arange(g.vertex_count), path))
    k, lab = zoo.site_clusters(g, new.occupancy)
    assert len(set(lab[path].tolist())) == 1


def test_site_clusters_against_hand_example():
    g = build_lattice("z2_window", [4, 1])
    k, lab = zoo.site_clusters(g, np.array([1, 1, 0, 1], bool))
    assert k == 2 and lab.tolist() == [0, 0, -1, 1]


def test_reduce_to_bernoulli():
    rep = zoo.reduce_to_bernoulli_check(TORUS, 0.5, 40, Streams(5))
    assert rep["occupancy_ok"] and rep["uncorrelated_ok"] and rep["cluster_ok"]


def test_merge_sparse_bins_preserves_totals():
    t = np.array([[50, 3, 1, 0, 2], [48, 2, 0, 1, 0]])
    m = zoo._merge_sparse_bins(t)
    assert m.sum() == t.sum() and np.array_equal(m.sum(axis=1), t.sum(axis=1))
