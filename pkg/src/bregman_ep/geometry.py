"""Bregman distances and the identities built on them.

These are the checked entry points: every function validates its
points against the domain of ``f`` and raises :class:`DomainError`
otherwise. Points and dual points are plain 1-d float arrays.
"""

import numpy as np

from .errors import ArgumentError, DomainError
from .legendre import as_point
from .rng import make_rng

#: Library-wide tolerances.
IDENTITY_RTOL = 1e-10
ROUNDTRIP_TOL = 1e-9
INNER_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12


def check_interior(f, x, name="x"):
    x = as_point(x, name)
    if not f.in_interior(x):
        raise DomainError(f"{name} is not in int dom f for {f!r}")
    return x


def check_domain(f, x, name="x"):
    x = as_point(x, name)
    if not f.in_domain(x):
        raise DomainError(f"{name} is not in dom f for {f!r}")
    return x


def eval_f(f, x):
    """Value of ``f`` at an interior point."""
    return f.value(check_interior(f, x))


def grad_f(f, x):
    """Gradient of ``f``: maps int dom f onto the dual space."""
    return f.grad(check_interior(f, x))


def conj_f(f, xstar):
    """Fenchel conjugate ``f*(x*) = sup_x <x*, x> - f(x)``."""
    return f.conj(as_point(xstar, "xstar"))


def grad_conj(f, xstar):
    """Gradient of the conjugate, the inverse of :func:`grad_f`.

    All built-in conjugates are finite on all of R^d, so only
    non-finite input is rejected.
    """
    return f.grad_conj(as_point(xstar, "xstar"))


def _dist(f, y, x, gx=None):
    if gx is None:
        gx = f.grad(x)
    return f.value(y) - f.value(x) - float(gx @ (y - x))


def bregman_distance(f, y, x):
    """``D_f(y, x) = f(y) - f(x) - <grad f(x), y - x>``.

    ``y`` may lie anywhere in ``dom f`` (for the entropy this includes
    the boundary of the orthant); ``x`` must be interior.

    >>> from bregman_ep.legendre import SquaredNorm
    >>> bregman_distance(SquaredNorm(), [1.0, 2.0], [0.0, 0.0])
    2.5
    """
    y = check_domain(f, y, "y")
    x = check_interior(f, x)
    if y.shape != x.shape:
        raise ArgumentError("y and x must have the same dimension")
    return _dist(f, y, x)


def three_point_gap(f, z, y, x):
    """Residual of the three-point identity.

    Returns ``D(z,x) - [D(z,y) + D(y,x) + <grad f(y) - grad f(x), z - y>]``,
    which vanishes up to rounding for every differentiable ``f``.
    """
    z = check_domain(f, z, "z")
    y = check_interior(f, y, "y")
    x = check_interior(f, x)
    gx, gy = f.grad(x), f.grad(y)
    rhs = _dist(f, z, y, gy) + _dist(f, y, x, gx) + float((gy - gx) @ (z - y))
    return _dist(f, z, x, gx) - rhs


def chain_gap(f, ys):
    """Residual of the telescoped Bregman chain identity.

    For ``y_1, ..., y_N``::

        D(y_1, y_N) = sum_{k=2}^{N} D(y_{k-1}, y_k)
                      + sum_{k=3}^{N} <grad f(y_{k-1}) - grad f(y_k), y_1 - y_{k-1}>

    obtained by applying the three-point identity with ``z = y_1`` at each
    link. Returns left side minus right side.
    """
    if len(ys) < 2:
        raise ArgumentError("chain_gap needs at least two points")
    ys = [check_interior(f, y, f"ys[{k}]") for k, y in enumerate(ys)]
    grads = [f.grad(y) for y in ys]
    total = 0.0
    for k in range(1, len(ys)):
        total += _dist(f, ys[k - 1], ys[k], grads[k])
    for k in range(2, len(ys)):
        total += float((grads[k - 1] - grads[k]) @ (ys[0] - ys[k - 1]))
    return _dist(f, ys[0], ys[-1], grads[-1]) - total


def young_fenchel_gap(f, x, xstar):
    """``f(x) + f*(x*) - <x*, x>``; nonnegative, zero exactly at gradient pairs."""
    x = check_domain(f, x)
    xstar = as_point(xstar, "xstar")
    return f.value(x) + f.conj(xstar) - float(xstar @ x)


def v_fn(f, x, xstar):
    """``V(x, x*) = f(x) - <x, x*> + f*(x*)``, equal to ``D_f(x, grad f*(x*))``."""
    return young_fenchel_gap(f, x, xstar)


def dual_average(f, weights, points):
    """Average taken in dual coordinates: ``grad f*(sum t_i grad f(x_i))``.

    By convexity of ``f*`` the result is Bregman-closer to any probe than
    the weighted average of the individual distances.
    """
    t = np.asarray(weights, dtype=float)
    if t.ndim != 1 or t.size == 0 or t.size != len(points):
        raise ArgumentError("need one weight per point")
    if np.any(t <= 0.0) or abs(t.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ArgumentError("weights must be positive and sum to 1")
    pts = [check_interior(f, p, f"points[{i}]") for i, p in enumerate(points)]
    dual = sum(ti * f.grad(p) for ti, p in zip(t, pts))
    return f.grad_conj(dual)


def total_convexity_estimate(f, x, t, n_samples, seed=0):
    """Sampled upper bound on the modulus of total convexity.

    Takes the minimum of ``D_f(x + t u, x)`` over ``n_samples`` random unit
    directions ``u``, skipping directions that leave ``dom f``. Intended for
    tests only: it bounds ``inf {D_f(y,x) : ||y - x|| = t}`` from above.
    """
    x = check_interior(f, x)
    if not t > 0:
        raise ArgumentError("t must be positive")
    if n_samples < 1:
        raise ArgumentError("n_samples must be at least 1")
    rng = make_rng(seed)
    gx = f.grad(x)
    best = np.inf
    for u in rng.unit_vectors(int(n_samples), x.size):
        y = x + t * u
        if not f.in_domain(y):
            continue
        best = min(best, _dist(f, y, x, gx))
    if not np.isfinite(best):
        raise DomainError("every sampled direction left dom f")
    return best
