"""Shared cluster tools: components, walks, stationarity, mass transport.
"""
# %%
import numpy as np

from percgraft import clusters
from percgraft.interchange import sample_permutation
from percgraft.lattice import build_lattice

rng = np.random.default_rng(0)

# %% components with window-side contacts
g = build_lattice("z2_window", [64, 64])
omega = rng.random(g.edge_count) < 0.55
part = clusters.components(g, omega)
centre = g.vid(32, 32)
print(f"{part.count} components; centre cluster size {part.component_size(centre)}, "
      f"ends proxy {clusters.ends_classification(part, centre, g).value}")

# %% the delayed walk on a torus preserves the law of the environment seen from the walker
t = build_lattice("z2_torus", [16, 16], "periodic")


def pair(i, steps):
    r = np.random.default_rng([5, i])
    w = r.random(t.edge_count) < 0.5
    path = clusters.sdrw_trace(t, w, 0, steps, r)
    return clusters.bond_ball_class(t, w, 0), clusters.bond_ball_class(t, w, path[-1])


rep = clusters.stationarity_check(pair, 2000, 50)
print(f"SDRW: {rep.bins} ball classes, chi2 {rep.chi2:.1f} (p={rep.pvalue:.2f}), "
      f"rejected {rep.rejected}")

# %% mass transport on the torus
fwd = sample_permutation(t, 1.0, rng)
w = rng.random(t.edge_count) < 0.5
for phi, cfg in ((clusters.PHI_IDENTITY, {"graph": t}),
                 (clusters.PHI_ADJACENCY, {"graph": t, "omega": w}),
                 (clusters.PHI_PERMUTATION, {"graph": t, "forward": fwd})):
    r = clusters.mass_transport_check(t, phi, cfg)
    print(f"{phi.name:12s} sent {r['sent']:.4f} received {r['received']:.4f}")
