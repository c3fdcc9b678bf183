"""Boundary quasimetric, quasiballs and the maximal function.

The pairing distance d(w, z) = |<d rho(w), w - z>| makes the boundary a
space of homogeneous type: quasiball measure scales like the square of the
radius (complex dimension 2).  Monte Carlo grids give unbiased measure
statistics; the Hardy-Littlewood maximal function rides a dyadic radius
ladder.
"""

import numpy as np

from hsconvex import ball, build_boundary_grid, check_homogeneous, \
    maximal_function, qdist, quasiball
from hsconvex.homtype import grid_qdist

domain = ball()
grid = build_boundary_grid(domain, resolution=12000, kind="random", seed=1)

e1 = np.array([1.0, 0.0], complex)
e2 = np.array([0.0, 1.0], complex)
print("pointwise distances on the sphere:")
print(f"  d(e1, e2) = {qdist(domain, e1, e2):.3f}   "
      f"d(e1, -e1) = {qdist(domain, e1, -e1):.3f}")

print("\nquasiball measure sweep at e1:")
for delta in (0.05, 0.1, 0.2, 0.4):
    _, meas = quasiball(grid, e1, delta)
    print(f"  delta = {delta:4.2f}: sigma(B) = {meas:.5f}, "
          f"sigma/delta^2 = {meas / delta ** 2:.2f}")

rep = check_homogeneous(grid, seed=3)
print(f"\nfitted dimension: {rep['fitted_dimension']:.3f} (target 2), "
      f"quasi-triangle constant: {rep['quasi_triangle_constant']:.2f}")

# a unit-mass spike spreads like distance^-2 under the maximal operator
i0 = int(np.argmax(grid.nodes[:, 0].real))
spike = np.zeros(grid.size)
spike[i0] = 1.0 / grid.w_sigma[i0]
ma = maximal_function(grid, spike)
d = grid_qdist(grid, grid.nodes[i0])
far = (d > 0.15) & (d < 1.2)
slope = np.polyfit(np.log(d[far]), np.log(ma[far]), 1)[0]
print(f"maximal function of a spike: decay slope {slope:.2f} (target -2)")
