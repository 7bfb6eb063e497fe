"""
Which parameters drive R0, and how the answer moves with the derivative order.
"""

from fracovid.model import ModelParams, basic_reproduction_number
from fracovid.sensitivity import R0_PARAMETERS, r0_alpha_sensitivity, sensitivity_index

p = ModelParams()
print(f"R0 at alpha = 1: {basic_reproduction_number(p, 1.0):.4f}")
print(f"{'parameter':>11} {'alpha=1':>9} {'alpha=0.75':>11} {'alpha=0.5':>10}")
ranked = sorted(R0_PARAMETERS, key=lambda k: -abs(sensitivity_index(k, p, 1.0)))
for name in ranked:
    row = [sensitivity_index(name, p, a) for a in (1.0, 0.75, 0.5)]
    print(f"{name:>11} " + " ".join(f"{x:+9.5f}" for x in row))

# the index with respect to alpha itself
for a in (0.5, 0.75, 1.0):
    print(f"Upsilon_alpha({a:g}) = {r0_alpha_sensitivity(p, a):.4f}")
