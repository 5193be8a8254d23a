"""A resting column settles to the hydrostatic pressure profile.

Run with ``python3 demos/hydrostatic_column.py [height_cells]``.
"""

import sys

import numpy as np

from vssph.scenes import bottom_pressure, build, hydrostatic_config

cells = int(sys.argv[1]) if len(sys.argv) > 1 else 20
sim = build(hydrostatic_config(cells))
exact = sim.config.rho0 * 9.8 * cells * sim.d0
print(f"{sim.state.n} particles, expected bottom pressure {exact:.1f} Pa")

for t_end in (0.25, 0.5, 1.0, 1.5):
    infos = sim.run(t_end=t_end)
    vmax = np.abs(sim.state.velocities).max()
    print(f"t = {t_end:4.2f} s  p_bottom = {bottom_pressure(sim):7.1f} Pa  "
          f"max|v| = {vmax:.2e} m/s  CG its = {infos[-1].cg_iterations}")
