"""
The Meissner field of a ball
============================

A superconducting ball of radius R (in penetration depths) sits in a
uniform vertical field.  The field B0 has a closed form, and its curl is
purely azimuthal.  We also solve for the same azimuthal component with
the finite-difference solver and compare the two.
"""
import numpy as np

from isoflux import Ball, BallField, SolidOfRevolution
from isoflux.meissner import j0, j0_tail_estimate, solve_axisym_meissner

# closed form: B0 at the centre, and curl B0 on the meridian half-plane
f = BallField(1.0)
print("C(1)              =", f.C_R)
print("B0(0)             =", f.b0([0.0, 0.0, 0.0]))
x = np.linspace(0, 1, 6)
print("curl B0 . y on z=0 =", np.round(f.curl_meridian(x, 0 * x), 5))

# the flux through the vertical diameter, divided by its length
print("axis ratio        =", f.axis_ratio())

# finite differences: u = A0 . theta_hat equals curl B0 . theta_hat inside
ball = Ball(1.0)
for n in (128, 256):
    sol = solve_axisym_meissner(ball, 6.0, n, 2 * n)
    R, Z = np.meshgrid(sol.r, sol.z, indexing="ij")
    inside = np.hypot(R, Z) < 1
    exact = f.curl_meridian(R[inside], Z[inside])
    err = np.linalg.norm(sol.u[inside] - exact) / np.linalg.norm(exact)
    print(f"{n:4d} x {2 * n:4d}: relative error {err:.2e}, "
          f"J0 = {j0(sol):.6f} (+ tail {j0_tail_estimate(sol):.1e}), "
          f"{sol.outer_iterations} far-field updates")

# any solid of revolution works; the azimuthal component stays nonnegative
sph = SolidOfRevolution.spheroid(1.0, 1.5)
sol = solve_axisym_meissner(sph, 3 * sph.diameter, 128, 256)
print("prolate spheroid: min u =", sol.u.min(), " J0 =", j0(sol))
