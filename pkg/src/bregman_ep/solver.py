"""Halpern-type cyclic iteration for common equilibrium/fixed points.

:func:`run_main` performs, for ``n = 1, 2, ...``::

    u_n     = Res_{g_m}( ... Res_{g_1}(x_n))          (or one g per step, cyclically)
    y_n     = P_C(grad f*(a_n grad f(anchor) + (1 - a_n) grad f(u_n)))
    x_{n+1} = P_C(grad f*(b_n grad f(y_n) + (1 - b_n) grad f(T_[n] y_n)))

where ``P_C`` is the Bregman projection, ``T_[n]`` cycles through the
operator family, and the anchor is the origin (so ``grad f(anchor) = 0``
for every built-in except the entropy). :func:`run_kumam` is the
two-step Mann-type baseline used for comparison.
"""

from dataclasses import asdict, dataclass, field
import math

import numpy as np

from .equilibrium import resolve
from .errors import ArgumentError, BregmanError, DomainError
from .geometry import _dist, check_interior
from .legendre import as_point
from .operators import cyclic_select, fixed_point_residual
from .projection import bregman_project

RESOLVENT_ORDERS = ("composed", "cyclic")


@dataclass(frozen=True)
class HarmonicSchedule:
    """``a / (n + b)``: vanishing with divergent sum for ``0 < a <= 1``, ``b >= 1``."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.a <= 1.0) or not self.b >= 1.0:
            raise ArgumentError("harmonic schedule needs 0 < a <= 1 and b >= 1")

    def __call__(self, n):
        return self.a / (n + self.b)

    def to_dict(self):
        return {"type": "harmonic", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ConstantSchedule:
    """Constant value in the open unit interval."""

    value: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.value < 1.0:
            raise ArgumentError(f"constant schedule value must lie in (0, 1), got {self.value}")

    def __call__(self, n):
        return self.value

    def to_dict(self):
        return {"type": "constant", "value": self.value}


def schedule_from_dict(spec):
    if isinstance(spec, (int, float)):
        return ConstantSchedule(float(spec))
    kind = spec.get("type")
    if kind == "harmonic":
        return HarmonicSchedule(spec.get("a", 1.0), spec.get("b", 1.0))
    if kind == "constant":
        return ConstantSchedule(spec["value"])
    raise ArgumentError(f"unknown schedule {kind!r}")


@dataclass
class SolverConfig:
    """Iteration parameters.

    ``anchor`` is ``"auto"`` (origin when it is interior to ``dom f``,
    otherwise the barycenter of ``C``), ``"zero"``, ``"barycenter"`` or an
    explicit point. ``strict=True`` refuses any anchor other than the origin.
    """

    alpha: HarmonicSchedule = field(default_factory=HarmonicSchedule)
    beta: ConstantSchedule = field(default_factory=ConstantSchedule)
    max_iters: int = 100_000
    stop_residual: float = 1e-8
    resolvent_tol: float = 1e-10
    rng_seed: int = 0
    resolvent_order: str = "composed"
    anchor: object = "auto"
    strict: bool = False
    n_probes: int = 128

    def __post_init__(self):
        if isinstance(self.alpha, dict):
            self.alpha = schedule_from_dict(self.alpha)
        if isinstance(self.beta, (dict, int, float)):
            self.beta = schedule_from_dict(self.beta)
        if not isinstance(self.beta, ConstantSchedule):
            raise ArgumentError("beta must be a constant schedule in (0, 1)")
        if int(self.max_iters) < 1:
            raise ArgumentError("max_iters must be positive")
        self.max_iters = int(self.max_iters)
        if not self.stop_residual >= 0:
            raise ArgumentError("stop_residual must be nonnegative")
        if not self.resolvent_tol > 0:
            raise ArgumentError("resolvent_tol must be positive")
        if self.resolvent_order not in RESOLVENT_ORDERS:
            raise ArgumentError(f"resolvent_order must be one of {RESOLVENT_ORDERS}")
        if isinstance(self.anchor, str):
            if self.anchor not in ("auto", "zero", "barycenter"):
                raise ArgumentError(f"unknown anchor {self.anchor!r}")
        else:
            self.anchor = as_point(self.anchor, "anchor")

    def to_dict(self):
        anchor = self.anchor if isinstance(self.anchor, str) else self.anchor.tolist()
        return {"alpha": self.alpha.to_dict(), "beta": self.beta.to_dict(),
                "max_iters": self.max_iters, "stop_residual": self.stop_residual,
                "resolvent_tol": self.resolvent_tol, "rng_seed": self.rng_seed,
                "resolvent_order": self.resolvent_order, "anchor": anchor,
                "strict": self.strict, "n_probes": self.n_probes}


@dataclass
class ProblemInstance:
    """Data of a common-solution problem.

    ``solution_set`` is the set ``Omega`` itself when it is known in closed
    form, and ``reference_solution`` any point of it.
    """

    f: object
    C: object
    bifunctions: list
    operators: list
    reference_solution: np.ndarray = None
    solution_set: object = None
    name: str = "custom"
    x1: np.ndarray = None

    def __post_init__(self):
        if not self.operators:
            raise ArgumentError("need at least one operator")
        if not self.bifunctions:
            raise ArgumentError("need at least one bifunction")
        if self.reference_solution is not None:
            self.reference_solution = as_point(self.reference_solution, "reference_solution")
        if self.x1 is not None:
            self.x1 = as_point(self.x1, "x1")

    @property
    def dim(self):
        return self.C.dim

    def consistency_residual(self, p=None):
        """Worst of the equilibrium and fixed-point residuals at ``p``."""
        from .equilibrium import ep_residual

        p = self.reference_solution if p is None else as_point(p)
        if p is None:
            raise ArgumentError("no reference solution to check")
        res = [ep_residual(g, p) for g in self.bifunctions]
        res += [fixed_point_residual(T, self.f, p) for T in self.operators]
        return max(res)


@dataclass
class IterationRecord:
    """State at the start of iteration ``n`` and what the step did.

    ``dist_to_ref`` is the Bregman distance ``D_f(p, x_n)`` to the reference
    solution; ``dist_to_proj_anchor0`` and ``dist_to_proj_x1`` are Euclidean
    distances to the two candidate limits ``P_Omega(anchor)`` and
    ``P_Omega(x_1)``. Unknown quantities are NaN.
    """

    n: int
    x: np.ndarray
    dist_to_ref: float
    dist_to_proj_anchor0: float
    dist_to_proj_x1: float
    ep_residual_max: float
    fixpoint_residual: float
    step_norm: float
    x_next: np.ndarray = None
    dist_ref_y: float = math.nan
    resolvent_gap: float = math.nan
    pre_projection_gap: float = math.nan


def _anchor(problem, config):
    f, C = problem.f, problem.C
    a = config.anchor
    if config.strict:
        if not f.zero_interior:
            raise DomainError(f"strict mode needs 0 in int dom f; {f!r} does not allow it")
        if not isinstance(a, str) and np.any(a != 0):
            raise ArgumentError("strict mode fixes the anchor at the origin")
        return np.zeros(C.dim)
    if isinstance(a, str):
        if a == "zero" or (a == "auto" and f.zero_interior):
            if not f.zero_interior:
                raise DomainError(f"0 is not in int dom f for {f!r}")
            return np.zeros(C.dim)
        return check_interior(f, C.barycenter(), "barycenter of C")
    return check_interior(f, a, "anchor")


def project_onto_solution_set(problem, anchor):
    """Bregman projection of ``anchor`` onto the closed-form solution set."""
    if problem.solution_set is None:
        raise ArgumentError("the solution set of this instance has no closed form")
    return bregman_project(problem.f, problem.solution_set, anchor)


class _Tracker:
    """Per-run diagnostics shared by both iterations."""

    def __init__(self, problem, config, x1, anchor):
        self.problem = problem
        self.f = problem.f
        self.p = problem.reference_solution
        self.probes = [g.feasible_set.probe_points(config.n_probes // 2,
                                                   config.n_probes - config.n_probes // 2,
                                                   config.rng_seed)
                       for g in problem.bifunctions]
        self.cand_anchor = self.cand_x1 = None
        if problem.solution_set is not None:
            if anchor is not None:
                self.cand_anchor = project_onto_solution_set(problem, anchor)
            self.cand_x1 = project_onto_solution_set(problem, x1)

    def ep_max(self, x):
        return max(max(0.0, float(np.max(-g.value(x, P))))
                   for g, P in zip(self.problem.bifunctions, self.probes))

    def dist_ref(self, x):
        return _dist(self.f, self.p, x) if self.p is not None else math.nan

    @staticmethod
    def _euclid(x, c):
        return float(np.linalg.norm(x - c)) if c is not None else math.nan

    def record(self, n, x, x_next, T, **extra):
        return IterationRecord(
            n=n, x=x, x_next=x_next,
            dist_to_ref=self.dist_ref(x),
            dist_to_proj_anchor0=self._euclid(x, self.cand_anchor),
            dist_to_proj_x1=self._euclid(x, self.cand_x1),
            ep_residual_max=self.ep_max(x),
            fixpoint_residual=float(np.linalg.norm(x - T.apply(x))),
            step_norm=float(np.linalg.norm(x_next - x)),
            **extra)


def _attach(err, n, trace):
    err.iteration = n
    err.trace = trace
    return err


def _start(problem, x1):
    f, C = problem.f, problem.C
    x = check_interior(f, x1, "x1")
    if x.size != C.dim:
        raise ArgumentError("x1 has the wrong dimension")
    if not C.contains(x):
        raise ArgumentError("x1 must lie in C")
    return x


def _stop(rec, config):
    return max(rec.ep_residual_max, rec.fixpoint_residual, rec.step_norm) <= config.stop_residual


def run_main(problem, config, x1):
    """Run the Halpern-type cyclic iteration and return its trace.

    Parameters
    ----------
    problem : ProblemInstance
    config : SolverConfig
    x1 : array_like
        Starting point in ``C`` and ``int dom f``.

    Returns
    -------
    list of IterationRecord
        One record per iteration; ``records[-1].x_next`` is the final iterate.
    """
    f, C = problem.f, problem.C
    x = _start(problem, x1)
    anchor = _anchor(problem, config)
    theta_anchor = f.grad(anchor)
    track = _Tracker(problem, config, x, anchor)
    gs, ops, m = problem.bifunctions, problem.operators, len(problem.bifunctions)
    trace = []
    n = 0
    try:
        for n in range(1, config.max_iters + 1):
            if config.resolvent_order == "composed":
                u = x
                for g in gs:
                    u = resolve(f, g, u, tol=config.resolvent_tol)
            else:
                u = resolve(f, gs[(n - 1) % m], x, tol=config.resolvent_tol)
            a = config.alpha(n)
            z = f.grad_conj(a * theta_anchor + (1.0 - a) * f.grad(u))
            y = bregman_project(f, C, z)
            T = cyclic_select(ops, n)
            b = config.beta(n)
            x_next = bregman_project(f, C, f.grad_conj(b * f.grad(y) + (1.0 - b) * f.grad(T.apply(y))))
            if not f.in_interior(x_next):
                raise DomainError(f"iterate {n + 1} left int dom f")
            rec = track.record(n, x, x_next, T, dist_ref_y=track.dist_ref(y),
                               resolvent_gap=float(np.linalg.norm(x - u)),
                               pre_projection_gap=float(np.linalg.norm(x - z)))
            trace.append(rec)
            if _stop(rec, config):
                break
            x = x_next
    except BregmanError as err:
        raise _attach(err, n, trace)
    return trace


def run_kumam(problem, config, x1):
    """Baseline two-step iteration for a single bifunction.

    Per step, with ``T = T_[n]``::

        z_n     = Res(x_n)
        y_n     = grad f*(b_n grad f(x_n) + (1 - b_n) grad f(T z_n))
        x_{n+1} = grad f*(a_n grad f(x_n) + (1 - a_n) grad f(T y_n))
    """
    if len(problem.bifunctions) != 1:
        raise ArgumentError("the baseline iteration takes exactly one bifunction")
    f = problem.f
    g = problem.bifunctions[0]
    x = _start(problem, x1)
    track = _Tracker(problem, config, x, None)
    trace = []
    n = 0
    try:
        for n in range(1, config.max_iters + 1):
            T = cyclic_select(problem.operators, n)
            z = resolve(f, g, x, tol=config.resolvent_tol)
            b, a = config.beta(n), config.alpha(n)
            gx = f.grad(x)
            y = f.grad_conj(b * gx + (1.0 - b) * f.grad(T.apply(z)))
            x_next = f.grad_conj(a * gx + (1.0 - a) * f.grad(T.apply(y)))
            if not f.in_interior(x_next):
                raise DomainError(f"iterate {n + 1} left int dom f")
            rec = track.record(n, x, x_next, T, dist_ref_y=track.dist_ref(y),
                               resolvent_gap=float(np.linalg.norm(x - z)))
            trace.append(rec)
            if _stop(rec, config):
                break
            x = x_next
    except BregmanError as err:
        raise _attach(err, n, trace)
    return trace


def record_to_dict(rec):
    out = asdict(rec)
    out["x"] = rec.x.tolist()
    out["x_next"] = None if rec.x_next is None else rec.x_next.tolist()
    return out
