"""
Two cells, one waveguide each
=============================

A walk through the two-cell analytics: the coupling ratio between the
cells, the largest rate it can support, and where the antennas should sit.
"""

import numpy as np

from pinchnet import ScenarioConfig, TwoCellGeometry, build_layout, coupling_ratio, feasibility_bound
from pinchnet import grid_oracle, stationary_points, suboptimal_placement, watts_to_dbm
from pinchnet.twocell import g1, suboptimal_solution

# Two 40 m cells side by side, users one metre either side of the border.
config = ScenarioConfig.from_dbm(d_l=80, d_w=20, n_row=1, n_col=2, target_rate=1.0)
layout = build_layout(config)
geom = TwoCellGeometry(x1=-1.0, y1=0.0, x2=1.0, y2=0.0, d=config.antenna_height)

# Dropping each antenna right above its user is the obvious choice.
f_naive = coupling_ratio(-1.0, 1.0, geom)
print(f"coupling ratio, antennas over users : {f_naive:.4f}")
print(f"largest feasible rate               : {feasibility_bound(f_naive):.4f} bit/s/Hz")

# g1 measures how much more antenna 1 helps its own user than it hurts the
# other one. Its stationary points are the roots of a quadratic.
sp = stationary_points(geom)
print("\nstationary points of g1:", ", ".join(f"{r:+.4f}" for r in sp.roots))
for x in (-40.0, -10.0, sp.roots[0], -1.0):
    print(f"  g1({x:+8.3f}) = {g1(x, geom):.4f}")

# Moving the antennas outward, away from the other cell, pays off.
x1p, x2p = suboptimal_placement(geom, config.d_l)
f_best = coupling_ratio(x1p, x2p, geom)
print(f"\nsuboptimal placement : ({x1p:+.4f}, {x2p:+.4f})")
print(f"coupling ratio       : {f_best:.4f}")
print(f"largest feasible rate: {feasibility_bound(f_best):.4f} bit/s/Hz")

# Compare with an exhaustive 1 cm grid that minimizes total power directly.
users = geom.user_positions(layout)
oracle = grid_oracle(users, layout, config, step=0.01)
sub = suboptimal_solution(users, layout, config)
print(f"\ngrid optimum   {np.round(oracle.placement, 2)}  {watts_to_dbm(oracle.solution.total):.3f} dBm")
print(f"suboptimal     {np.round(sub.placement, 2)}  {watts_to_dbm(sub.solution.total):.3f} dBm")
