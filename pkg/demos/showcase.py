"""Main iteration on the built-in Euclidean showcase.

The solution set is the single point 0. The script prints the distance to
it every few iterations and the final iterate.
"""

import numpy as np

from bregman_ep import SolverConfig, generate_instance, run_main

problem = generate_instance("euclidean-showcase")
config = SolverConfig(max_iters=2000, stop_residual=1e-10)
trace = run_main(problem, config, problem.x1)

for rec in trace[:5] + trace[9:50:10] + trace[99::200]:
    print(f"n = {rec.n:5d}  x_n = {np.round(rec.x, 6)}  D(p, x_n) = {rec.dist_to_ref:.3e}")
print(f"stopped after {len(trace)} iterations at {trace[-1].x_next}")
