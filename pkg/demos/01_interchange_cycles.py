"""Cycles of the interchange process on a torus.

Every edge carries a rate-1 Poisson clock; at each ring the labels at its
two ends are swapped.  The cycle structure is tracked by a treap-backed
cycle index and cross-checked against the permutation itself.
"""
# %%
import numpy as np

from percgraft.interchange import (generate_timeline, longest_cycles, orbits,
                                   permutation_sign, run_interchange)
from percgraft.lattice import build_lattice
from percgraft.randomness import Streams
from percgraft.render import render_interchange
from _common import out

g = build_lattice("z2_torus", [25, 25], "periodic")

# %% cycle length statistics as beta grows
for beta in (0.25, 0.5, 1.0, 2.0):
    tl = generate_timeline(g, beta, Streams(1))
    perm, idx = run_interchange(g, tl, Streams(1))
    hist = idx.cycle_length_histogram()
    top = [len(c) for c in longest_cycles(idx, 3)]
    print(f"beta={beta:4}: {tl.total_rings:5d} rings, {sum(hist.values()):4d} cycles, "
          f"longest {top}, sign {permutation_sign(perm):+d}")

# %% the index agrees with the orbits of the permutation
assert sorted(map(sorted, idx.cycles())) == sorted(map(sorted, orbits(perm.forward)))

# %% picture: the two longest cycles in colour, the rest faint
with open(out("interchange.svg"), "w") as fh:
    fh.write(render_interchange(g, orbits(perm.forward)))
print("wrote", out("interchange.svg"))
