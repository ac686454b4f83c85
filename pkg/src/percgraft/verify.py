"""Named verification suites (fast versions of the acceptance checks).

Each suite returns a JSON-serialisable report::

    {"suite": name, "passed": bool, "checks": [...], "counterexample": ... | None}

``counterexample`` holds the first failing instance, enough to rerun it.
"""
from __future__ import annotations

import math

import numpy as np

from . import clusters, corner, interchange, loopmodel, zoo
from .lattice import build_lattice
from .randomness import Streams

__all__ = ["SUITES", "run_suite"]


class _Report:
    def __init__(self, name):
        self.name = name
        self.checks = []
        self.counterexample = None

    def check(self, name, ok, counterexample=None, **detail):
        ok = bool(ok)
        self.checks.append({"name": name, "passed": ok, **detail})
        if not ok and self.counterexample is None:
            self.counterexample = {"check": name, **(counterexample or {})}
        return ok

    def done(self):
        return {"suite": self.name, "passed": all(c["passed"] for c in self.checks),
                "checks": self.checks, "counterexample": self.counterexample}


def corner_invariants(seed: int = 0, seeds: int = 8, size: int = 256) -> dict:
    rep = _Report("corner-invariants")
    win = corner.Window.centered(size, size)
    for s in range(seed, seed + seeds):
        cfg = corner.generate_corner(win, 0.2, 0.8, Streams(s))
        ce = {"seed": s, "window": [win.x0, win.y0, win.width, win.height], "p": 0.2, "q": 0.8}
        rep.check(f"degree-2 seed {s}", corner.degree_violations(cfg) == 0, ce)
        step = corner.height_step_violations(cfg)
        rep.check(f"step rule seed {s}",
                  step["vertical_edge_violations"] + step["horizontal_edge_violations"] == 0, ce)
        const = corner.height_constancy(cfg)
        rep.check(f"height constancy seed {s}", const["violations"] == 0, ce,
                  clusters=const["clusters_checked"])
        inj = corner.height_bijection_check(cfg)
        rep.check(f"height injectivity seed {s}", inj["injective"], ce, spanning=inj["spanning"])
    return rep.done()


def treap_oracle(seed: int = 0, instances: int = 100) -> dict:
    rep = _Report("treap-oracle")
    rng = np.random.default_rng(seed)
    events = 0
    for i in range(instances):
        n = int(rng.integers(3, 31))
        beta = float(rng.uniform(0, 3))
        g = build_lattice("path", [n], "periodic")
        st = Streams(seed, ("treap-oracle", i))
        tl = interchange.generate_timeline(g, beta, st)
        bad = []

        def on_event(k, u, v, perm, idx):
            if sorted(map(sorted, idx.cycles())) != sorted(map(sorted, interchange.orbits(perm.forward))):
                bad.append(k)

        perm, idx = interchange.run_interchange(g, tl, st, on_event=on_event)
        events += tl.total_rings
        ce = {"seed": seed, "instance": i, "n": n, "beta": beta}
        if not rep.check(f"instance {i}", not bad and np.array_equal(idx.to_permutation(), perm.forward),
                         {**ce, "event": bad[0] if bad else None}):
            break
        sign_ok = interchange.permutation_sign(perm) == (-1) ** tl.total_rings
        rep.check(f"sign instance {i}", sign_ok, ce)
    rep.checks.append({"name": "events", "passed": True, "count": events})
    return rep.done()


def loopon_enumeration(seed: int = 0, proposals: int = 200_000) -> dict:
    rep = _Report("loopon-enumeration")
    graphs = [("hexagon", build_lattice("hex_patch", [3, 2])),
              ("two hexagons", build_lattice("hex_patch", [5, 2]))]
    for label, g in graphs:
        for x in (0.5, 1.0, 2.0):
            for n in (0.5, 1.0, 2.0):
                params = loopmodel.GibbsParams(x, n)
                exact = dict(loopmodel.enumerate_exact(g, params))
                s = loopmodel.LoopSampler(g, params, Streams(seed, (label, x, n)))
                freq = s.sample_frequencies(proposals)
                tv = 0.5 * sum(abs(freq.get(c, 0.0) - exact.get(c, 0.0))
                               for c in set(freq) | set(exact))
                ce = {"graph": label, "x": x, "n": n, "seed": seed}
                rep.check(f"{label} x={x} n={n} tv", tv < 0.01, ce, tv=tv)
                rep.check(f"{label} x={x} n={n} finite-energy", s.bound_violations == 0, ce,
                          checked=s.bound_checks)
    return rep.done()


def zoo_reductions(seed: int = 0, samples: int = 200) -> dict:
    rep = _Report("zoo-reductions")
    g = build_lattice("z2_torus", [64, 64], "periodic")
    shape = zoo.FixedShape([(0, 0), (1, 0), (0, 1), (1, 1)])
    for lam in (0.1, 0.3):
        for dist, size in ((zoo.Singleton(), 1), (shape, 4)):
            f = np.array([generate_fraction(g, lam, dist, Streams(seed, ("occ", s)))
                          for s in range(samples)])
            target = 1 - math.exp(-size * lam)
            se = f.std(ddof=1) / math.sqrt(samples)
            rep.check(f"occupancy {dist} lambda={lam}", abs(f.mean() - target) <= 3 * se,
                      {"seed": seed, "lambda": lam, "animal": str(dist)},
                      mean=float(f.mean()), target=target, se=float(se))
    worm = zoo.RandomWalkWorm(0.2, 50)
    for s in range(10):
        a = zoo.generate_zoo(g, 0.05, worm, Streams(seed, ("mono", s)))
        b = zoo.generate_zoo(g, 0.1, worm, Streams(seed, ("mono", s)))
        rep.check(f"monotone seed {s}", np.all(b.occupancy >= a.occupancy),
                  {"seed": seed, "replica": s})
    return rep.done()


def generate_fraction(g, lam, dist, streams):
    return zoo.generate_zoo(g, lam, dist, streams).occupied_fraction()


def mass_transport(seed: int = 0, samples: int = 10) -> dict:
    rep = _Report("mass-transport")
    g = build_lattice("z2_torus", [64, 64], "periodic")
    for s in range(samples):
        rng = np.random.default_rng([seed, s])
        omega = rng.random(g.edge_count) < 0.5
        fwd = interchange.sample_permutation(g, 1.0, rng)
        for phi, cfg in ((clusters.PHI_IDENTITY, {"graph": g}),
                         (clusters.PHI_ADJACENCY, {"graph": g, "omega": omega}),
                         (clusters.PHI_PERMUTATION, {"graph": g, "forward": fwd})):
            r = clusters.mass_transport_check(g, phi, cfg)
            rep.check(f"{phi.name} sample {s}", r["ok"], {"seed": seed, "sample": s},
                      difference=r["difference"])
    return rep.done()


SUITES = {
    "corner-invariants": corner_invariants,
    "treap-oracle": treap_oracle,
    "loopon-enumeration": loopon_enumeration,
    "zoo-reductions": zoo_reductions,
    "mass-transport": mass_transport,
}


def run_suite(name: str, seed: int = 0) -> dict:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed=seed)
