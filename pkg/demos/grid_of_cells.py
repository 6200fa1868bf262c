"""
Pinching antennas against fixed antennas on a grid of cells
===========================================================

Each cell has a waveguide running along it. A conventional system radiates
from the waveguide centre; a pinching antenna can slide to wherever the
interference picture is best. Cross-entropy search picks the positions.
"""

import sys

import numpy as np

from pinchnet import CEParams, ExperimentSpec, ScenarioConfig, build_layout, run_sweep, summarize

n_trials = int(sys.argv[1]) if len(sys.argv) > 1 else 50
rates = (0.2, 0.4, 0.6, 0.8, 1.0)

# The layout: cell centres and the span each antenna may occupy.
layout = build_layout(ScenarioConfig.from_dbm(n_row=3, n_col=2))
print("cell centres (x, y):")
print(np.array2string(layout.centers, precision=1))
print("antenna spans:")
print(np.array2string(layout.x_bounds, precision=1))

for n_row in (2, 3):
    scenario = ScenarioConfig.from_dbm(d_l=80, d_w=20, n_row=n_row, n_col=2)
    spec = ExperimentSpec(n_trials=n_trials, seed=n_row, rates=rates, scenario=scenario, ce=CEParams())
    result = run_sweep(spec, ["conventional", "ce"])
    for policy in ("pmax-substitute", "discard"):
        rows = {(r.scheme, r.target_rate): r for r in summarize(result.records, policy, scenario.p_max)}
        print(f"\n{n_row}x2 cells, policy {policy}")
        print("R_t   conventional (dBm)   pinching (dBm)   gap (dB)")
        for rt in rates:
            conv, ce = rows[("conventional", rt)].mean_power_dbm, rows[("ce", rt)].mean_power_dbm
            print(f"{rt:<5} {conv:18.2f} {ce:16.2f} {conv - ce:10.2f}")
