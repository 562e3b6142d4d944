"""Built-in problem instances with closed-form solution sets.

Every instance is built so that the common solution set is nonempty and
known exactly; ``reference_solution`` is a point of it and
``solution_set`` the set itself.
"""

import numpy as np

from .equilibrium import LinearMonotone, LinearPiece, ProximalConvex, WeightedL1, ZeroPiece
from .errors import ArgumentError
from .legendre import NegativeEntropy, SquaredNorm
from .operators import ProjectionOperator, identity
from .rng import make_rng
from .sets import Box, Halfspace, Hyperplane, Simplex
from .solver import ProblemInstance


def degenerate_identity(d, seed):
    """Zero bifunction and identity operator: every point of C solves."""
    f = SquaredNorm()
    C = Box.cube(d, 5.0)
    return ProblemInstance(f, C, [ProximalConvex(ZeroPiece(), C)], [identity()],
                           reference_solution=np.zeros(d), solution_set=C,
                           name="degenerate-identity", x1=np.full(d, 3.0))


def euclidean_showcase(d, seed):
    """``A = I`` monotone bifunction and projections onto ``x_1 <= 1``, ``x_2 <= 1``.

    The only equilibrium point of ``<z, y - z> >= 0`` on a cube centred at
    the origin is ``0``, which both halfspaces contain.
    """
    if d < 2:
        raise ArgumentError("euclidean-showcase needs d >= 2")
    f = SquaredNorm()
    C = Box.cube(d, 5.0)
    e = np.eye(d)
    ops = [ProjectionOperator(f, Halfspace(e[0], 1.0), np.zeros(d)),
           ProjectionOperator(f, Halfspace(e[1], 1.0), np.zeros(d))]
    x1 = np.zeros(d)
    x1[:2] = (4.0, -3.0)
    return ProblemInstance(f, C, [LinearMonotone(np.eye(d), None, C)], ops,
                           reference_solution=np.zeros(d),
                           solution_set=Box(np.zeros(d), np.zeros(d)),
                           name="euclidean-showcase", x1=x1)


def limit_probe(d, seed):
    """Solution set is the segment ``[1, 3] x {0}^(d-1)``.

    The anchor (origin) and an off-axis start project onto different
    endpoints, which separates the two candidate limits.
    """
    if d < 2:
        raise ArgumentError("limit-probe needs d >= 2")
    f = SquaredNorm()
    C = Box.cube(d, 5.0)
    w = np.ones(d)
    w[0] = 0.0
    e = np.eye(d)
    lo = np.zeros(d)
    hi = np.zeros(d)
    lo[0], hi[0] = 1.0, 3.0
    ops = [ProjectionOperator(f, Halfspace(-e[0], -1.0)),
           ProjectionOperator(f, Halfspace(e[0], 3.0))]
    x1 = np.zeros(d)
    x1[:2] = (4.0, 2.0)
    ref = np.zeros(d)
    ref[0] = 2.0
    return ProblemInstance(f, C, [ProximalConvex(WeightedL1(w), C)], ops,
                           reference_solution=ref, solution_set=Box(lo, hi),
                           name="limit-probe", x1=x1)


def entropy_simplex(d, seed):
    """Entropy geometry on the floored simplex; solutions form the face ``x_d = floor``.

    ``C = {x >= 0.05, sum x = 1}`` keeps every point of ``C`` inside the
    open orthant. ``h(y) = y_d`` is minimized over ``C`` exactly on the
    face where the last coordinate sits at its floor, and both operators
    are entropic projections onto halfspaces containing that face.
    """
    if d < 2:
        raise ArgumentError("entropy-simplex needs d >= 2")
    floor = 0.05
    f = NegativeEntropy()
    lower = np.full(d, floor)
    C = Simplex(d, 1.0, lower=lower)
    c = np.zeros(d)
    c[-1] = 1.0
    support = np.ones(d, dtype=bool)
    support[-1] = False
    ops = [ProjectionOperator(f, Halfspace(c, 0.5)),
           ProjectionOperator(f, Halfspace(-np.where(support, 1.0, 0.0), -0.4))]
    face = Simplex(d, 1.0, support, lower=lower)
    x1 = np.arange(1.0, d + 1.0)
    return ProblemInstance(f, C, [ProximalConvex(LinearPiece(c), C)], ops,
                           reference_solution=face.witness(), solution_set=face,
                           name="entropy-simplex", x1=x1 / x1.sum())


def random_monotone(d, seed):
    """Seeded positive-definite-plus-skew ``A`` and three random halfspaces through a margin of 0."""
    rng = make_rng(seed)
    f = SquaredNorm()
    C = Box.cube(d, 5.0)
    M = rng.normal((d, d))
    S = rng.normal((d, d))
    A = M @ M.T / d + 0.1 * np.eye(d) + 0.5 * (S - S.T)
    ops = []
    for a in rng.unit_vectors(3, d):
        ops.append(ProjectionOperator(f, Halfspace(a, rng.uniform(low=0.1, high=1.0)),
                                      np.zeros(d)))
    return ProblemInstance(f, C, [LinearMonotone(A, None, C)], ops,
                           reference_solution=np.zeros(d),
                           solution_set=Box(np.zeros(d), np.zeros(d)),
                           name="random-monotone", x1=C.euclidean_project(3.0 * rng.normal(d)))


def linear_kumam(d, seed):
    """Everything linear near the origin: interior resolvent and hyperplane projections."""
    if d != 2:
        raise ArgumentError("linear-kumam is defined for d = 2")
    f = SquaredNorm()
    C = Box.cube(2, 10.0)
    A = np.array([[1.0, 0.5], [-0.5, 1.0]])
    ops = [ProjectionOperator(f, Hyperplane([1.0, -1.0], 0.0), np.zeros(2)),
           ProjectionOperator(f, Hyperplane([1.0, 2.0], 0.0), np.zeros(2))]
    return ProblemInstance(f, C, [LinearMonotone(A, None, C)], ops,
                           reference_solution=np.zeros(2),
                           solution_set=Box(np.zeros(2), np.zeros(2)),
                           name="linear-kumam", x1=np.array([1.0, 2.0]))


CATALOG = {
    "degenerate-identity": (degenerate_identity, 2),
    "euclidean-showcase": (euclidean_showcase, 2),
    "limit-probe": (limit_probe, 2),
    "entropy-simplex": (entropy_simplex, 3),
    "random-monotone": (random_monotone, 4),
    "linear-kumam": (linear_kumam, 2),
}


def list_instances():
    return {name: (fn.__doc__ or "").strip().splitlines()[0].replace("``", "") for name, (fn, _) in CATALOG.items()}


def generate_instance(name, d=None, seed=0):
    """Build a catalog instance; deterministic in ``(name, d, seed)``."""
    if name not in CATALOG:
        raise ArgumentError(f"unknown instance {name!r}; choose from {sorted(CATALOG)}")
    fn, default_d = CATALOG[name]
    d = default_d if d is None else int(d)
    if d < 1:
        raise ArgumentError("dimension must be positive")
    return fn(d, seed)
