"""
A field whose best ratio is never reached
=========================================

A unit field wound around a torus with an irrational slope has its
field lines dense on the torus.  Closed curves can follow it ever more
closely, so the ratio approaches one, but no finite polyline gets
there.  The loop probe shows the best ratio creeping up with the vertex
budget.
"""
from isoflux.currents import circulation, length
from isoflux.optimize import OptimizerConfig, convergents, loop_supremum_probe, torus_field

tf = torus_field(2.0, 0.5)
print("winding slope", tf.winding, "convergents", convergents(tf.winding, 40))
for p, q in convergents(tf.winding, 13):
    h = tf.helix(p, q, 16 * q)
    print(f"  helix {p}/{q}: ratio {circulation(tf, h) / length(h):.6f}")

for n in (32, 64, 128):
    cfg = OptimizerConfig(n_vertices=n, max_iters=200)
    best = loop_supremum_probe(tf, tf.domain(), cfg, generators=tf.generators(n))
    print(f"{n:4d} vertices: best loop ratio {best.ratio:.6f}")
