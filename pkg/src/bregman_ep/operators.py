"""Quasi-Bregman nonexpansive self-maps and the cyclic selector.

A :class:`QbneOperator` wraps a Bregman projection, a bifunction
resolvent, or a composition of other operators. Compositions apply
their factors left to right, and the empty composition is the identity.
"""

import numpy as np

from .equilibrium import resolve
from .errors import ArgumentError
from .geometry import _dist, check_interior
from .legendre import as_point
from .projection import bregman_project

FIXED_POINT_TOL = 1e-7


class QbneOperator:
    """Base class. ``known_fixed_point`` is an optional witness ``p = T(p)``."""

    def __init__(self, known_fixed_point=None):
        self.known_fixed_point = (None if known_fixed_point is None
                                  else as_point(known_fixed_point, "known_fixed_point"))

    def __call__(self, x):
        return self.apply(x)

    def apply(self, x):
        raise NotImplementedError


class ProjectionOperator(QbneOperator):
    """``T = P^f_S`` for a closed convex ``S``; fixed points are exactly ``S``."""

    def __init__(self, f, target, known_fixed_point=None):
        super().__init__(known_fixed_point)
        self.f = f
        self.target = target

    def apply(self, x):
        return bregman_project(self.f, self.target, x)

    def to_dict(self):
        return {"type": "projection", "set": self.target.to_dict()}

    def __repr__(self):
        return f"ProjectionOperator({self.target!r})"


class ResolventOperator(QbneOperator):
    """``T = Res^f_g``; fixed points are exactly EP(g)."""

    def __init__(self, f, g, known_fixed_point=None):
        super().__init__(known_fixed_point)
        self.f = f
        self.g = g

    def apply(self, x):
        return resolve(self.f, self.g, x)

    def to_dict(self):
        return {"type": "resolvent", "bifunction": self.g.to_dict()}

    def __repr__(self):
        return f"ResolventOperator({self.g!r})"


class Composition(QbneOperator):
    """``T = T_k o ... o T_1`` for ``factors = [T_1, ..., T_k]``."""

    def __init__(self, factors, known_fixed_point=None):
        super().__init__(known_fixed_point)
        self.factors = list(factors)

    def apply(self, x):
        y = np.asarray(x, dtype=float)
        for T in self.factors:
            y = T.apply(y)
        return np.array(y, dtype=float)

    def to_dict(self):
        return {"type": "composition", "factors": [T.to_dict() for T in self.factors]}

    def __repr__(self):
        return f"Composition({self.factors!r})"


def identity():
    """The identity map, as the empty composition."""
    return Composition([])


def apply(T, x):
    return T.apply(as_point(x))


def cyclic_select(family, n):
    """Operator used at iteration ``n`` (1-based): ``family[(n - 1) mod N]``.

    >>> cyclic_select(["T1", "T2", "T3"], 4)
    'T1'
    """
    if not family:
        raise ArgumentError("operator family is empty")
    if n < 1:
        raise ArgumentError("iteration index n starts at 1")
    return family[(n - 1) % len(family)]


def qbne_gap(T, f, p, x, tol=FIXED_POINT_TOL):
    """``D_f(p, x) - D_f(p, T x)``; nonnegative when ``T`` is QBNE and ``p = T p``."""
    p = as_point(p, "p")
    x = check_interior(f, x)
    if fixed_point_residual(T, f, p) > tol:
        raise ArgumentError("p is not a fixed point of T within tolerance")
    return _dist(f, p, x) - _dist(f, p, T.apply(x))


def fixed_point_residual(T, f, p):
    """How far ``p`` is from being a fixed point of ``T``.

    Interior points are tested directly with ``||T p - p||``. Points on the
    boundary of ``dom f`` cannot be fed to ``T``, so there the structural
    characterization of the fixed-point set is used instead (target set
    membership for projections, equilibrium residual for resolvents, and
    the worst factor for compositions, i.e. a common fixed point).
    """
    from .equilibrium import ep_residual

    p = as_point(p, "p")
    if f.in_interior(p):
        return float(np.linalg.norm(T.apply(p) - p))
    if isinstance(T, ProjectionOperator):
        return T.target.violation(p)
    if isinstance(T, ResolventOperator):
        if not T.g.feasible_set.contains(p):
            return T.g.feasible_set.violation(p)
        return ep_residual(T.g, p)
    if isinstance(T, Composition):
        return max((fixed_point_residual(S, f, p) for S in T.factors), default=0.0)
    raise ArgumentError(f"cannot certify fixed points of {type(T).__name__}")


def operator_from_dict(spec, f):
    from .equilibrium import bifunction_from_dict
    from .sets import set_from_dict

    kind = spec.get("type")
    if kind == "projection":
        return ProjectionOperator(f, set_from_dict(spec["set"]), spec.get("known_fixed_point"))
    if kind == "resolvent":
        return ResolventOperator(f, bifunction_from_dict(spec["bifunction"]),
                                 spec.get("known_fixed_point"))
    if kind == "composition":
        return Composition([operator_from_dict(s, f) for s in spec["factors"]],
                           spec.get("known_fixed_point"))
    if kind == "identity":
        return identity()
    raise ArgumentError(f"unknown operator type {kind!r}")
