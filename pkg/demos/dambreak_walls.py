"""Dambreak with sticky and slippery walls.

Runs 0.5 s at a coarse spacing and reports the front position and d_bar for
each (cn, ct) wall setting.  Run with ``python3 demos/dambreak_walls.py``.
"""

from vssph.scenes import build, dambreak_config

for cn, ct in ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)):
    sim = build(dambreak_config(d0=0.02, cn=cn, ct=ct))
    infos = sim.run(t_end=0.5)
    front = sim.state.positions[:, 0].max()
    d_bar = min(i.d_bar for i in infos) / sim.d0
    its = max(i.cg_iterations for i in infos)
    print(f"cn = {cn}, ct = {ct}: front at x = {front:.3f} m, "
          f"min d_bar = {d_bar:.3f} d0, max CG its = {its}")
