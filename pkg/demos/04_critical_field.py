"""
From the best ratio to the first critical field
===============================================

The leading-order field at which a vortex line pays for itself is
|log eps| / (2 R0).  A simple energy model with a per-line log-log cost
and an N^2 repulsion shows how many lines appear above it.  Their number
stays bounded as eps goes to zero at fixed K when the field is
H + K log log(1/eps).
"""
import numpy as np

from isoflux import BallField
from isoflux.critfield import EnergyModel, hc1_zero, optimal_line_count, phase_table

R0 = BallField(1.0).axis_ratio()
L0 = 2.0
for eps in (1e-2, 1e-4, 1e-6, 1e-8):
    print(f"eps = {eps:.0e}: leading-order field {hc1_zero(eps, R0):8.3f}")

print("\nline count at H + K log log(1/eps)")
eps_list = [10.0**-k for k in range(3, 13)]
for K in (1, 3, 10):
    counts = []
    for eps in eps_list:
        m = EnergyModel(eps, 0.0, 0.0, R0, L0)
        counts.append(optimal_line_count(m.with_field(m.hc1_zero + K * m.loglog), 1000)[0])
    print(f"  K = {K:2d}: {counts}")

print("\nphase table (eps = 1e-8)")
for eps, h, dh, n, E in phase_table([1e-8], [-3, -1, 0, 1, 3, 10], R0, L0):
    print(f"  h = {h:8.3f} (H {dh:+7.3f}): N* = {n:2d}, E = {E:+.3f}")

# stronger repulsion never adds lines
a = np.array([r[3] for r in phase_table(eps_list, [1, 3, 10], R0, L0, c_rep=1.0)])
b = np.array([r[3] for r in phase_table(eps_list, [1, 3, 10], R0, L0, c_rep=2.0)])
print("\ndoubling the repulsion removes", int((a - b).sum()), "lines in total, adds none:",
      bool(np.all(b <= a)))
