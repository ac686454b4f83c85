"""Loop O(n) model on a hexagonal patch.

Configurations are even subgraphs weighted by x^|omega| n^loops.  A
face-flip Metropolis chain samples them; on tiny graphs the stationary law
is compared against exact enumeration.
"""
# %%
from percgraft.lattice import build_lattice
from percgraft.loopmodel import (GibbsParams, LoopSampler, count_trifurcations,
                                 enumerate_exact)
from percgraft.randomness import Streams
from percgraft.render import render_edges
from _common import out

# %% two hexagons: chain frequencies against the exact law
g = build_lattice("hex_patch", [5, 2])
params = GibbsParams(1.2, 2.0)
exact = dict(enumerate_exact(g, params))
freq = LoopSampler(g, params, Streams(0)).sample_frequencies(200_000)
for cfg, prob in exact.items():
    print(f"{len(cfg):2d} edges: exact {prob:.4f}  chain {freq.get(cfg, 0):.4f}")

# %% a larger patch
g = build_lattice("hex_patch", [30, 20])
s = LoopSampler(g, GibbsParams(0.9, 1.0), Streams(1))
for sweep in range(5):
    s.run(20 * len(s.faces))
    print(f"sweep {20 * (sweep + 1):3d}: {s.edge_count} edges, {s.loop_count} loops, "
          f"longest {s.longest_loop()}")
print("finite-energy bound checks:", s.bound_checks, "violations:", s.bound_violations)
print("trifurcations:", count_trifurcations(g, s.state))

# %%
with open(out("loops.svg"), "w") as fh:
    fh.write(render_edges(g, s.state))
print("wrote", out("loops.svg"))
