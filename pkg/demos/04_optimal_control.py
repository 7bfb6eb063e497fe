"""
Optimal vaccination and preventive measures over the 52-day horizon,
with the cost-effectiveness summary for alpha = 1 and alpha = 0.99.
"""

import numpy as np

from fracovid.config import default_config_path, load_config
from fracovid.control import forward_backward_sweep
from fracovid.costeff import effectiveness_report

cfg = load_config(default_config_path())
weights = cfg.weights()

print(f"{'alpha':>6} {'scenario':>8} {'iters':>5} {'J':>10} {'peak I+P+H':>11} {'v at max':>8}")
reports = []
for alpha in (1.0, 0.99):
    for scenario, kw in (("both", {}), ("only-v", dict(use_m=False)), ("only-m", dict(use_v=False))):
        sweep = cfg.sweep_config(**kw)
        r = forward_backward_sweep(cfg.params, alpha, cfg.initial_state, weights, cfg.grid, sweep)
        active = r.state["I"] + r.state["P"] + r.state["H"]
        at_max = np.mean(r.controls.v == sweep.v_max) if sweep.use_v else 0.0
        print(f"{alpha:6.2f} {scenario:>8} {r.iterations:5d} {r.J:10.4g} {active.max():11.0f} "
              f"{100 * at_max:7.1f}%")
        if scenario == "both":
            reports.append(effectiveness_report(alpha, r.state, r.controls, *cfg.cost_coefficients))

print()
print(f"{'alpha':>6} {'AV':>12} {'TC':>12} {'ACER':>9} {'F_bar':>8}   (individual-days)")
for rep in reports:
    print(f"{rep.alpha:6.2f} {rep.AV:12.0f} {rep.TC:12.0f} {rep.ACER:9.6f} {rep.F_bar:8.5f}")
