"""Acceptance criteria 1-12, each at its stated tolerance.

Every test records one PASS/FAIL line (see ``conftest.py``), printed in the
terminal summary, before asserting.
"""
import math
import time

import numpy as np
import pytest

from percgraft import clusters, corner, interchange, loopmodel, zoo
from percgraft.lattice import build_lattice
from percgraft.randomness import Streams


# 1 ---------------------------------------------------------------------------

def test_c01_corner_degree_two(record):
    t = time.perf_counter()
    seeds, worst = 100, 0
    win = corner.Window.centered(2048, 2048)
    for s in range(seeds):
        cfg = corner.generate_corner(win, 0.2 + 0.6 * (s % 2), 0.8 - 0.3 * (s % 3), Streams(s))
        worst = max(worst, corner.degree_violations(cfg))
    elapsed = time.perf_counter() - t
    ok = worst == 0 and elapsed < 10
    record(1, ok, f"{seeds} seeds on 2048^2: max violations {worst}, {elapsed:.1f}s (< 10s)")
    assert ok


# 2 ---------------------------------------------------------------------------

def test_c02_height_constancy_and_step_rule(record):
    bad_const = bad_step = checked = edges = 0
    for s in range(30):
        p, q = [(0.2, 0.8), (0.6, 0.2), (0.5, 0.5)][s % 3]
        cfg = corner.generate_corner(corner.Window.centered(512, 512), p, q, Streams(1000 + s))
        hf = corner.compute_height(cfg)
        step = corner.height_step_violations(cfg, hf)
        bad_step += step["vertical_edge_violations"] + step["horizontal_edge_violations"]
        edges += step["checked_edges"]
        for parity in ("even", "odd"):
            c = corner.height_constancy(cfg, hf, parity=parity)
            bad_const += c["violations"]
            checked += c["clusters_checked"]
    ok = bad_const == 0 and bad_step == 0
    record(2, ok, f"constancy violations {bad_const}/{checked} cluster checks, "
                  f"step-rule violations {bad_step}/{edges} edges")
    assert ok


# 3 ---------------------------------------------------------------------------

def _spanning_path(cfg):
    w = cfg.window
    for j in range(0, w.height // 2, 1):
        for y in (j, -j):
            path = corner.trace_path(cfg, (w.x0, y))
            if path.spans("left", "right"):
                return path
    raise AssertionError("no left-right spanning path found")


@pytest.mark.parametrize("p,q,target", [(0.2, 0.8, 1.0), (0.6, 0.2, 1 / 3)])
def test_c03_asymptotic_slope(record, p, q, target):
    t = time.perf_counter()
    assert corner.asymptotic_slope(p, q) == pytest.approx(target)
    win = corner.Window.centered(10_000, 30_000)
    hits, lengths, slopes = 0, [], []
    for s in range(100):
        cfg = corner.generate_corner(win, p, q, Streams(s, ("slope", p, q)))
        path = _spanning_path(cfg)
        slope = corner.slope_statistic(path, min_length=10_000)
        lengths.append(len(path) - 1)
        slopes.append(slope)
        hits += abs(slope - target) < 0.05
    elapsed = time.perf_counter() - t
    ok = hits >= 95 and elapsed < 60 and min(lengths) >= 10_000
    record(3, ok, f"(p,q)=({p},{q}) target {target:.4f}: {hits}/100 within 0.05, "
                  f"mean {np.mean(slopes):.4f}, min length {min(lengths)}, {elapsed:.1f}s")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_c04_parity_lemma_as_stated(record):
    """Literal statement: at even vertices the positive-direction edge is
    horizontal for q > 1/2 and vertical for q < 1/2."""
    total_viol = total_even = 0
    for p, q in ((0.2, 0.8), (0.8, 0.2)):
        win = corner.Window.centered(2000, 6000)
        for s in range(20):
            cfg = corner.generate_corner(win, p, q, Streams(s, ("parity", q)))
            rep = corner.parity_check(cfg, _spanning_path(cfg))
            assert rep["checked"]
            total_viol += rep["violations"]
            total_even += rep["even_horizontal"] + rep["even_vertical"]
    ok = total_viol == 0
    record(4, ok, f"{total_viol}/{total_even} even vertices violate the stated axis "
                  "(see decisions ledger: the parity classes are swapped)")
    assert ok


# 5 ---------------------------------------------------------------------------

def test_c05_height_injectivity(record):
    collisions = spanning = nonconst = 0
    for s in range(100):
        cfg = corner.generate_corner(corner.Window.centered(1024, 1024), 0.2, 0.8,
                                     Streams(s, ("inject",)))
        rep = corner.height_bijection_check(cfg)
        collisions += sum(len(v) - 1 for v in rep["collisions"].values())
        nonconst += len(rep["non_constant"])
        spanning += rep["spanning"]
    ok = collisions == 0 and nonconst == 0 and spanning > 0
    record(5, ok, f"{collisions} collisions, {nonconst} non-constant among "
                  f"{spanning} spanning clusters over 100 windows of 1024^2")
    assert ok


# 6 ---------------------------------------------------------------------------

def _random_small_graph(rng):
    kind = rng.integers(4)
    if kind == 0:
        a = int(rng.integers(3, 8))
        b = int(rng.integers(3, 50 // a + 1))
        return build_lattice("z2_torus", [a, b], "periodic")
    if kind == 1:
        a = int(rng.integers(2, 8))
        b = int(rng.integers(2, 50 // a + 1))
        return build_lattice("z2_window", [a, b])
    if kind == 2:
        return build_lattice("path", [int(rng.integers(3, 51))], "periodic")
    return build_lattice("tree", [3, int(rng.integers(1, 4))])


def test_c06_cycle_index_oracle(record):
    rng = np.random.default_rng(6)
    events = mismatches = sign_bad = 0
    for i in range(1000):
        g = _random_small_graph(rng)
        beta = float(rng.uniform(0.5, 5.0))
        st = Streams(6, ("oracle", i))
        tl = interchange.generate_timeline(g, beta, st)
        bad = []

        def on_event(k, u, v, perm, idx):
            orbs = interchange.orbits(perm.forward)
            if len(orbs) != len(idx.roots()) or any(idx.cycle_of(o[0]) != o for o in orbs):
                bad.append(k)

        perm, idx = interchange.run_interchange(g, tl, st, on_event=on_event)
        events += tl.total_rings
        mismatches += len(bad)
        sign_bad += interchange.permutation_sign(perm) != (-1) ** tl.total_rings
    ok = events >= 10**5 and mismatches == 0 and sign_bad == 0
    record(6, ok, f"{events} events over 1000 instances: {mismatches} mismatches, "
                  f"{sign_bad} sign failures")
    assert ok


# 7 ---------------------------------------------------------------------------

def test_c07_loop_model_single_hexagon(record):
    g = build_lattice("hex_patch", [3, 2])
    assert g.edge_count == 6 and len(g.faces()) == 1
    worst_tv, viol, checks = 0.0, 0, 0
    for x in (0.5, 1.0, 2.0):
        for n in (0.5, 1.0, 2.0):
            params = loopmodel.GibbsParams(x, n)
            sampler = loopmodel.LoopSampler(g, params, Streams(7, ("hex", x, n)))
            freq = sampler.sample_frequencies(10**6)
            full = x**6 * n / (1 + x**6 * n)
            target = {(): 1 - full, tuple(range(6)): full}
            tv = 0.5 * sum(abs(freq.get(k, 0.0) - target.get(k, 0.0))
                           for k in set(freq) | set(target))
            worst_tv = max(worst_tv, tv)
            viol += sampler.bound_violations
            checks += sampler.bound_checks
    ok = worst_tv < 0.01 and viol == 0 and checks == 9 * 10**6
    record(7, ok, f"max TV {worst_tv:.2e} over 9 (x,n) pairs; finite-energy bound "
                  f"violations {viol}/{checks} proposals")
    assert ok


# 8 ---------------------------------------------------------------------------

def test_c08_zoo_reductions(record):
    g = build_lattice("z2_torus", [64, 64], "periodic")
    shape = zoo.FixedShape([(0, 0), (1, 0), (0, 1), (1, 1)])
    lines, ok = [], True
    for lam in (0.05, 0.2, 0.5):
        for dist, size in ((zoo.Singleton(), 1), (shape, 4)):
            f = np.array([zoo.generate_zoo(g, lam, dist, Streams(8, ("occ", lam, size, s)))
                          .occupied_fraction() for s in range(400)])
            target = 1 - math.exp(-size * lam)
            z = (f.mean() - target) / (f.std(ddof=1) / math.sqrt(len(f)))
            ok &= abs(z) <= 3
            lines.append(f"|A|={size} lam={lam}: z={z:+.2f}")
    mono_pairs = mono_bad = 0
    worm, box = zoo.RandomWalkWorm(0.2, 60), zoo.Box(1, 4)
    gw = build_lattice("z2_window", [96, 96])
    for dist in (zoo.Singleton(), shape, worm, box):
        for s in range(10):
            lams = (0.01, 0.05, 0.1, 0.3)
            occ = [zoo.generate_zoo(gw, l, dist, Streams(8, ("mono", s))).occupancy for l in lams]
            for a, b in zip(occ, occ[1:]):
                mono_pairs += 1
                mono_bad += bool(np.any(a & ~b))
    ok &= mono_bad == 0
    record(8, ok, "; ".join(lines) + f"; monotonicity failures {mono_bad}/{mono_pairs}")
    assert ok


# 9 ---------------------------------------------------------------------------

def test_c09_mass_transport(record):
    g = build_lattice("z2_torus", [64, 64], "periodic")
    worst, checks = 0.0, 0
    models = {
        "bernoulli": lambda rng: {"graph": g, "omega": rng.random(g.edge_count) < 0.5},
        "zoo": lambda rng: _zoo_bonds(g, rng),
        "interchange": lambda rng: {"graph": g,
                                    "forward": interchange.sample_permutation(g, 1.0, rng)},
    }
    phis = {"bernoulli": ("identity", "adjacency"), "zoo": ("identity", "adjacency"),
            "interchange": ("identity", "permutation", "adjacency")}
    table = {"identity": clusters.PHI_IDENTITY, "adjacency": clusters.PHI_ADJACENCY,
             "permutation": clusters.PHI_PERMUTATION}
    for name, make in models.items():
        for s in range(100):
            cfg = make(np.random.default_rng([9, s, len(name)]))
            if name == "interchange":
                # the edges whose positions were swapped: omega = {u ~ pi(u)}
                fwd = cfg["forward"]
                u, v = g.edges[:, 0], g.edges[:, 1]
                cfg["omega"] = (fwd[u] == v) | (fwd[v] == u)
            for ph in phis[name]:
                r = clusters.mass_transport_check(g, table[ph], cfg)
                worst = max(worst, r["difference"])
                checks += 1
    ok = worst <= 1e-9
    record(9, ok, f"{checks} checks (3 models x 100 configs; identity, adjacency, permutation): "
                  f"max |received - sent| = {worst:.1e}")
    assert ok


def _zoo_bonds(g, rng):
    occ = zoo.generate_zoo(g, 0.3, zoo.Singleton(), Streams(int(rng.integers(2**32)))).occupancy
    return {"graph": g, "omega": occ[g.edges[:, 0]] & occ[g.edges[:, 1]]}


# 10 --------------------------------------------------------------------------

def test_c10_stationarity(record):
    g = build_lattice("z2_torus", [10, 10], "periodic")

    def sdrw_pair(i, m):
        rng = np.random.default_rng([10, i])
        omega = rng.random(g.edge_count) < 0.5
        tr = clusters.sdrw_trace(g, omega, 0, m, rng)
        return (clusters.bond_ball_class(g, omega, tr[0]),
                clusters.bond_ball_class(g, omega, tr[-1]))

    def orbit_pair(i, m):
        rng = np.random.default_rng([11, i])
        fwd = interchange.sample_permutation(g, 1.0, rng)
        tr = clusters.orbit_trace(fwd, 0, m)
        return (clusters.permutation_ball_class(g, fwd, tr[0]),
                clusters.permutation_ball_class(g, fwd, tr[-1]))

    reps = {name: clusters.stationarity_check(fn, 10**4, 10, alpha=0.01)
            for name, fn in (("sdrw/bernoulli", sdrw_pair), ("orbit/interchange", orbit_pair))}
    same = clusters.stationarity_check(sdrw_pair, 500, 0)
    ok = not any(r.rejected for r in reps.values()) and same.chi2 == 0.0
    record(10, ok, "; ".join(f"{k}: min bin p={r.min_bin_pvalue:.3g} vs "
                             f"{r.alpha / r.bins:.2g} ({r.bins} bins)" for k, r in reps.items()))
    assert ok


# 11 --------------------------------------------------------------------------

def test_c11_staircase_density(record):
    n = 401
    cfg = corner.CornerConfig.from_arrays(np.ones(n), np.ones(n), -(n // 2), -(n // 2))
    path = corner.trace_path(cfg, (0, 0))
    trace = corner.successor_trace(path, start=(0, 0))
    nxt_horizontal = trace[1:, 1] == trace[:-1, 1]
    dens = clusters.density_along(nxt_horizontal)
    even = [dens.at(k) for k in range(2, len(dens.prefix) + 1, 2)]
    ok = len(even) > 100 and all(d == 0.5 for d in even)
    record(11, ok, f"{len(even)} even prefix lengths, densities in "
                   f"[{min(even)}, {max(even)}] (exactly 0.5 required)")
    assert ok


# 12 --------------------------------------------------------------------------

def test_c12_surgery(record):
    win = corner.Window(-32, 0, 64, 192)
    local = merged = designated = 0
    runs = 1000
    for s in range(runs):
        cfg = corner.generate_corner(win, 0.2, 0.8, Streams(s, ("surgery",)))
        out = corner.surgery_experiment(cfg, (0, 6), Streams(s, ("surgery", "fresh")))
        local += out.locality_ok
        designated += out.designated is not None
        merged += out.merged
    ok = local == runs and merged > 0
    record(12, ok, f"locality {local}/{runs} bit-identical; merges {merged}/{designated} "
                   f"designated pairs (frequency {merged / runs:.3f})")
    assert ok
