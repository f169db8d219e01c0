"""
Which curve catches the most flux per unit length?
==================================================

The ratio of circulation to length is maximized over curves that start
and end on the boundary of the sample.  For the ball the answer is the
vertical diameter.  We watch the ascent straighten a tilted chord, then
run the multistart driver and compare against closed loops.
"""
import numpy as np

from isoflux import Ball, BallField, Polyline3
from isoflux.currents import hausdorff
from isoflux.optimize import (OptimizerConfig, diameter_curve, loop_supremum_probe,
                              multistart_maximize, ratio_ascent)

ball, f = Ball(1.0), BallField(1.0)
R0 = f.axis_ratio()
print("ratio of the vertical diameter:", R0)

# a chord through the centre, tilted 30 degrees from vertical
e = np.array([np.sin(np.pi / 6), 0.0, np.cos(np.pi / 6)])
chord = Polyline3(np.linspace(-1, 1, 64)[:, None] * e)
history = []
out = ratio_ascent(f, ball, chord, OptimizerConfig(), history=history)
print(f"tilted chord: {history[0]:.6f} -> {out.ratio:.10f} in {len(history)} accepted steps")
print("distance to the diameter:", hausdorff(out.curve, diameter_curve(ball)))

# random boundary-to-boundary chords plus the diameter itself
cfg = OptimizerConfig(n_starts=16, seed=1)
best, r0, starts = multistart_maximize(f, ball, cfg)
print(f"multistart: R0 = {r0:.10f} from {len(starts)} starts; "
      f"worst start ended at {min(s.ratio for s in starts):.6f}")

# closed loops do strictly worse
loop = loop_supremum_probe(f, ball, OptimizerConfig(n_vertices=32))
print(f"best loop ratio {loop.ratio:.6f}, margin {r0 - loop.ratio:.6f}")
