"""Reference constants and kernel stability for every kernel family.

Run with ``python3 demos/calibration_tour.py``.
"""

import numpy as np

from vssph.calibration import calibrate
from vssph.kernel import KernelFamily, make_kernel, stability_table

D0 = 0.01

print(f"{'kernel':<18}{'alpha0':>10}{'A0':>9}{'c0':>9}{'beta0':>8}  min Omega")
for fam in KernelFamily:
    kernel = make_kernel(fam.value, d0=D0)
    c = calibrate(2, D0, kernel, rho0=1000.0)
    _, om = stability_table(make_kernel(fam.value, 1.0), 10_000)
    # constants are reported in lattice units so that rows are comparable
    print(f"{fam.value:<18}{c.alpha0:>10.4f}{c.A0 * D0**2:>9.4f}{c.c0:>9.4f}"
          f"{c.beta0:>8.3f}  {om.min():+.4f} ({'stable' if np.all(om > 0) else 'unstable'})")
