"""Bregman projections of one point onto the simplex under several geometries.

Under the negative entropy the projection onto the scaled simplex is the
familiar rescaling ``s * x / sum(x)``; under the squared norm it is the
Euclidean projection. The other kinds land in between.
"""

import numpy as np

from bregman_ep import (NegativeEntropy, PNorm, QuadraticForm, SquaredNorm, Simplex,
                        bregman_distance, bregman_project, projection_vi_residual)

x = np.array([0.2, 1.5, 0.6])
C = Simplex(3, 1.0)
kinds = [SquaredNorm(), QuadraticForm(np.diag([1.0, 4.0, 9.0])), PNorm(1.5), PNorm(3.0),
         NegativeEntropy()]

print(f"x = {x}")
for f in kinds:
    P = bregman_project(f, C, x)
    vi = projection_vi_residual(f, C, x, P, C.probe_points(40, 40, 0))
    print(f"{type(f).__name__:15s} P = {np.round(P, 6)}  D(P, x) = {bregman_distance(f, P, x):.4g}  "
          f"VI residual = {vi:.1e}")
print("entropy closed form:", np.round(x / x.sum(), 6))
