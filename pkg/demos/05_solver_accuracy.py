"""
The PECE integrator against the exact relaxation solution
y(t) = E_alpha(-t^alpha) of D^alpha y = -y, y(0) = 1.
"""

import numpy as np

from fracovid.solver import TimeGrid, mittag_leffler, pece_solve

for alpha in (0.6, 0.9, 0.99):
    exact_at = lambda t: mittag_leffler(alpha, -t**alpha)
    prev = None
    for h in (0.04, 0.02, 0.01):
        g = TimeGrid(0, 5, h)
        y = pece_solve(lambda t, y: -y, [1.0], alpha, g).values[:, 0]
        err = np.max(np.abs(y - [exact_at(t) for t in g.times]))
        rate = "" if prev is None else f"  order ~{np.log2(prev / err):.2f}"
        print(f"alpha={alpha:<5} h={h:<5} max error {err:.2e}{rate}")
        prev = err
