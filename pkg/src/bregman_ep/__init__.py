"""Bregman distances, projections and resolvents on R^d, plus a Halpern-type
cyclic iteration for common equilibrium and fixed points."""

from .equilibrium import (LinearMonotone, LinearPiece, MaxCoordinate, ProximalConvex, WeightedL1,
                          ZeroPiece, check_axioms, ep_residual, firmly_nonexpansive_gap, resolve,
                          resolvent_inequality_gap)
from .errors import ArgumentError, BregmanError, ConvergenceError, DomainError, InfeasibleError
from .experiment import ExperimentSpec, run_experiment
from .geometry import (bregman_distance, chain_gap, dual_average, three_point_gap,
                       total_convexity_estimate, v_fn, young_fenchel_gap)
from .instances import generate_instance, list_instances
from .legendre import NegativeEntropy, PNorm, QuadraticForm, SquaredNorm
from .operators import Composition, ProjectionOperator, ResolventOperator, cyclic_select, qbne_gap
from .projection import bregman_project, projection_vi_residual, pythagoras_gap
from .rng import SplitMix64
from .sets import Ball, Box, Halfspace, Hyperplane, Intersection, Simplex
from .solver import (ConstantSchedule, HarmonicSchedule, ProblemInstance, SolverConfig,
                     project_onto_solution_set, run_kumam, run_main)
from .verify import verify_suite

__version__ = "0.1.0"
