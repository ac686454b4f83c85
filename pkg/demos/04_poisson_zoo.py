"""Poisson zoo: site percolation by random lattice animals.

Each vertex receives a Poisson(lambda) number of animals, each a finite
connected set translated to the vertex.  All intensities share one set of
arrival times, so occupancy grows monotonically in lambda.
"""
# %%
import math

import numpy as np

from percgraft import zoo
from percgraft.lattice import build_lattice
from percgraft.randomness import Streams
from percgraft.render import render_sites
from _common import out

g = build_lattice("z2_torus", [128, 128], "periodic")
worm = zoo.parse_animal("worm:geom:0.1:100")

# %% monotone coupling in lambda
prev = None
for lam in (0.005, 0.01, 0.02, 0.04):
    cfg = zoo.generate_zoo(g, lam, worm, Streams(0))
    k, lab = zoo.site_clusters(g, cfg.occupancy)
    big = np.bincount(lab[lab >= 0]).max() if k else 0
    grew = prev is None or bool(np.all(cfg.occupancy >= prev))
    print(f"lambda={lam:.3f}: occupied {cfg.occupied_fraction():.3f}, {k} clusters, "
          f"largest {big}, superset of previous: {grew}")
    prev = cfg.occupancy

# %% singletons reduce to Bernoulli site percolation
rep = zoo.reduce_to_bernoulli_check(build_lattice("z2_torus", [48, 48], "periodic"),
                                    0.4, 30, Streams(1))
print(f"singleton zoo vs Bernoulli(p={rep['p']:.3f}): occupancy ok {rep['occupancy_ok']}, "
      f"uncorrelated {rep['uncorrelated_ok']}, cluster sizes p-value {rep['cluster_pvalue']:.3f}")

# %%
with open(out("zoo.svg"), "w") as fh:
    fh.write(render_sites(g, prev))
print("wrote", out("zoo.svg"))
