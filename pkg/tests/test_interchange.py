import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from percgraft.cycleindex import CycleIndex, InvalidTransposition
from percgraft.interchange import (ClockTimeline, Permutation, cycle_length_histogram,
                                   generate_timeline, histogram_from_orbits, longest_cycles,
                                   orbits, permutation_sign, run_interchange, sample_permutation)
from percgraft.lattice import build_lattice
from percgraft.randomness import Streams


def _same_partition(idx, fwd):
    orbs = orbits(fwd)
    return len(orbs) == len(idx.roots()) and all(idx.cycle_of(o[0]) == o for o in orbs)


def test_no_rings_is_identity():
    g = build_lattice("path", [6])
    tl = generate_timeline(g, 0.0, Streams(0))
    assert all(len(t) == 0 for t in tl.rings)
    perm, idx = run_interchange(g, tl)
    assert np.array_equal(perm.forward, np.arange(6))
    assert idx.cycle_length_histogram() == {1: 6}
    assert permutation_sign(perm) == 1


def test_single_ring_is_transposition():
    g = build_lattice("path", [4])
    rings = tuple(np.array([0.5]) if e == 1 else np.empty(0) for e in range(g.edge_count))
    perm, idx = run_interchange(g, ClockTimeline(1.0, rings))
    assert perm.forward.tolist() == [0, 2, 1, 3]
    assert idx.cycle_length_histogram() == {1: 2, 2: 1}
    assert permutation_sign(perm) == -1


def test_three_vertex_path_hand_trace():
    # rings {a,b} at 0.3 then {b,c} at 0.7: a -> b -> c, b -> a, c -> b
    g = build_lattice("path", [3])
    rings = (np.array([0.3]), np.array([0.7]))
    perm, idx = run_interchange(g, ClockTimeline(1.0, rings))
    a, b, c = 0, 1, 2
    assert perm(a) == c and perm(b) == a and perm(c) == b
    assert idx.cycle_of(a) == [a, c, b]
    # the other ring order gives the inverse cycle
    perm2, idx2 = run_interchange(g, ClockTimeline(1.0, (np.array([0.7]), np.array([0.3]))))
    assert idx2.cycle_of(a) == [a, b, c]


def test_transposition_merge_and_split():
    idx = CycleIndex(5, np.random.default_rng(0))
    idx.apply_transposition(1, 3)
    assert idx.cycle_of(1) == [1, 3] and idx.cycle_length(3) == 2
    idx.apply_transposition(1, 3)
    assert idx.cycle_length_histogram() == {1: 5}
    with pytest.raises(InvalidTransposition):
        idx.apply_transposition(2, 2)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 14), st.lists(st.tuples(st.integers(0, 13), st.integers(0, 13)), max_size=60),
       st.integers(0, 2**32 - 1))
def test_cycle_index_matches_brute_force(n, pairs, seed):
    idx = CycleIndex(n, np.random.default_rng(seed))
    perm = Permutation.identity(n)
    for u, v in pairs:
        u, v = u % n, v % n
        if u == v:
            continue
        perm.swap_positions(u, v)
        idx.apply_transposition(u, v)
        assert _same_partition(idx, perm.forward)
    assert np.array_equal(idx.to_permutation(), perm.forward)
    assert perm.is_bijection()
    assert sum(k * c for k, c in idx.cycle_length_histogram().items()) == n


def test_timeline_determinism_and_mean():
    g = build_lattice("z2_torus", [5, 5], "periodic")
    a = generate_timeline(g, 2.0, Streams(3))
    b = generate_timeline(g, 2.0, Streams(3))
    assert all(np.array_equal(x, y) for x, y in zip(a.rings, b.rings))
    totals = np.array([generate_timeline(g, 2.0, Streams(s)).total_rings for s in range(300)])
    mean = g.edge_count * 2.0
    assert abs(totals.mean() - mean) < 3 * math.sqrt(mean / len(totals))
    with pytest.raises(ValueError):
        generate_timeline(g, -1.0, Streams(0))


def test_timeline_validation():
    with pytest.raises(ValueError):
        ClockTimeline(1.0, (np.array([0.5, 0.2]),))
    with pytest.raises(ValueError):
        ClockTimeline(1.0, (np.array([1.5]),))
    g = build_lattice("path", [3])
    with pytest.raises(ValueError):
        run_interchange(g, ClockTimeline(1.0, (np.empty(0),)))


def test_events_sorted_by_time_then_edge():
    tl = ClockTimeline(1.0, (np.array([0.5]), np.array([0.2, 0.5])))
    t, e = tl.events()
    assert t.tolist() == [0.2, 0.5, 0.5] and e.tolist() == [1, 0, 1]


def test_sign_equals_ring_parity():
    for s in range(40):
        g = build_lattice("z2_torus", [4, 5], "periodic")
        tl = generate_timeline(g, 1.5, Streams(s))
        perm, _ = run_interchange(g, tl, Streams(s), check_every_event=True)
        assert permutation_sign(perm) == (-1) ** tl.total_rings


def test_sample_permutation_and_helpers():
    g = build_lattice("z2_torus", [6, 6], "periodic")
    fwd = sample_permutation(g, 1.0, np.random.default_rng(0))
    assert np.array_equal(np.sort(fwd), np.arange(36))
    tl = generate_timeline(g, 1.0, Streams(2))
    perm, idx = run_interchange(g, tl)
    assert cycle_length_histogram(idx) == histogram_from_orbits(orbits(perm.forward))
    top = longest_cycles(idx, 2)
    lengths = sorted((len(c) for c in orbits(perm.forward)), reverse=True)
    assert [len(c) for c in top] == lengths[:2]
