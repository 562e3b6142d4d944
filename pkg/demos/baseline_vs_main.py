"""Baseline two-step iteration against the main iteration on a linear instance.

Both runs start from the same point; the table shows the distance to the
reference solution after a fixed number of steps.
"""

from bregman_ep import SolverConfig, generate_instance, run_kumam, run_main

problem = generate_instance("linear-kumam")
for steps in (10, 50, 200):
    config = SolverConfig(max_iters=steps, stop_residual=0)
    main = run_main(problem, config, problem.x1)[-1]
    base = run_kumam(problem, config, problem.x1)[-1]
    print(f"{steps:4d} steps  main D = {main.dist_to_ref:.3e}  baseline D = {base.dist_to_ref:.3e}")
