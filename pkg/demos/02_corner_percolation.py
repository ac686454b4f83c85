"""Corner percolation: paths, heights and slopes.

Columns carry signs xi_x, rows signs eta_y; every vertex keeps exactly one
horizontal and one vertical edge, so the open subgraph is a union of paths
and loops.  A height function on the dual squares labels the clusters.
"""
# %%
import numpy as np

from percgraft import corner
from percgraft.randomness import Streams
from percgraft.render import render_corner
from _common import out

win = corner.Window.centered(128, 128)
cfg = corner.generate_corner(win, 0.2, 0.8, Streams(0))
print("interior vertices with degree != 2:", corner.degree_violations(cfg))

# %% height rule and per-cluster constancy
hf = corner.compute_height(cfg)
print("step rule:", corner.height_step_violations(cfg, hf))
print("finite loops:", corner.height_constancy(cfg, hf))
print("spanning clusters get distinct heights:",
      corner.height_bijection_check(cfg)["injective"])

# %% asymptotic slope (2p - 1) / (1 - 2q) on tall windows
for p, q in ((0.2, 0.8), (0.6, 0.2)):
    tall = corner.generate_corner(corner.Window.centered(2000, 8000), p, q, Streams(3))
    for y in range(0, 200):
        path = corner.trace_path(tall, (tall.window.x0, y))
        if path.spans("left", "right"):
            break
    print(f"(p, q) = ({p}, {q}): slope {corner.slope_statistic(path):.3f}, "
          f"target {corner.asymptotic_slope(p, q):.3f}")

# %% resampling a band of columns only changes the vertical edges inside it
new = corner.resample_columns(cfg, -4, 4, Streams(0, ("band",)))
print("edges outside the band unchanged:", corner._edges_outside_equal(cfg, new, -4, 4))

# %% picture coloured by cluster height
right, up = corner.open_edges(cfg)
with open(out("corner.svg"), "w") as fh:
    fh.write(render_corner(right, up, hf.vertex_heights()))
print("wrote", out("corner.svg"))
