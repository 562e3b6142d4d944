"""Bregman projections onto the built-in convex sets.

``bregman_project(f, C, x)`` returns the unique minimizer of
``D_f(., x)`` over ``C``. Exact scalar dual searches are used where the
geometry allows (affine sets, boxes, simplices, balls); everything else
goes through projected gradient on ``y -> D_f(y, x)`` with the set's
Euclidean projection as the inner oracle.
"""

import numpy as np

from .errors import ArgumentError, ConvergenceError, InfeasibleError
from .geometry import _dist, check_interior
from .legendre import NegativeEntropy, QuadraticForm
from .sets import Ball, Box, Halfspace, Hyperplane, Simplex

MAX_ITER = 10_000
SCALAR_MAX_STEPS = 200
SCALAR_TOL = 1e-10
PG_TOL = 1e-12
STALL_STEPS = 20
STALL_TOL = 1e-8


def _scalar_root(phi, lo, hi, x0=None, dphi=None, max_steps=SCALAR_MAX_STEPS):
    """Root of an increasing scalar function on a bracket ``phi(lo) <= 0 <= phi(hi)``.

    Newton steps are taken while they stay inside the bracket and at least
    halve from one step to the next, bisection otherwise. Stops when the
    bracket or the step is at rounding level.
    """
    x = 0.5 * (lo + hi) if x0 is None else x0
    last = np.inf
    for _ in range(max_steps):
        v = phi(x)
        if v == 0.0:
            return x
        if v < 0.0:
            lo = x
        else:
            hi = x
        # Newton only while its steps keep halving; a steep dphi can stall it
        step_ok = False
        if dphi is not None:
            d = dphi(x)
            if np.isfinite(d) and d > 0:
                xn = x - v / d
                if lo < xn < hi and abs(xn - x) <= 0.5 * last:
                    step_ok = True
                    if abs(xn - x) <= 4e-16 * (1.0 + abs(x)):
                        return xn
        if not step_ok:
            xn = 0.5 * (lo + hi)
        last = abs(xn - x)
        x = xn
        if hi - lo <= 4e-16 * (1.0 + abs(x)):
            return x
    raise ConvergenceError(f"scalar root search exceeded {max_steps} steps")


def _expand(phi, start, direction, max_doublings=200):
    """Walk from ``start`` until ``phi`` changes sign; returns the far end."""
    step = 1.0
    for _ in range(max_doublings):
        far = start + direction * step
        v = phi(far)
        if np.isnan(v) or (v >= 0.0 if direction > 0 else v <= 0.0):
            return far
        step *= 2.0
    return None


def _entropy_affine_feasible(a, b, equality):
    if equality:
        if b > 0:
            return bool(np.any(a > 0))
        if b < 0:
            return bool(np.any(a < 0))
        return bool(np.any(a > 0) and np.any(a < 0))
    return b > 0 or bool(np.any(a < 0))


def _project_affine(f, s, x, equality):
    a, b = s.a, s.b
    if isinstance(f, NegativeEntropy) and not _entropy_affine_feasible(a, b, equality):
        raise InfeasibleError("affine set misses the open positive orthant")
    theta = f.grad(x)
    scale = 1.0 + abs(b) + np.abs(a) @ np.abs(x)

    def z(lam):
        return f.grad_conj(theta - lam * a)

    # psi(lam) = b - <a, z(lam)> is increasing in lam
    def psi(lam):
        with np.errstate(over="ignore", invalid="ignore"):
            v = b - float(a @ z(lam))
        return np.inf if np.isnan(v) else v

    def dpsi(lam):
        t = theta - lam * a
        if f.separable:
            h = f.conj_hessian_diag(t)
            return float(np.sum(a * a * h))
        return float(a @ f.conj_hessian(t) @ a)

    v0 = psi(0.0)
    if abs(v0) <= SCALAR_TOL * 1e-3 * scale or (not equality and v0 >= 0.0):
        return np.array(x, dtype=float)
    if v0 < 0.0:
        lo, hi = 0.0, _expand(psi, 0.0, +1)
    else:
        lo, hi = _expand(psi, 0.0, -1), 0.0
    if hi is None or lo is None:
        raise InfeasibleError("dual search found no multiplier; set misses int dom f")
    lam = _scalar_root(psi, lo, hi, x0=0.0, dphi=dpsi)
    return z(lam)


def _project_box(f, s, x):
    if isinstance(f, NegativeEntropy) and np.any(s.hi < 0.0):
        raise InfeasibleError("box misses the positive orthant")
    return np.clip(x, s.lo, s.hi)


def _project_simplex_separable(f, s, x):
    """Separable kinds: ``y_i = max(grad f*(theta_i + mu), lower_i)`` on the support."""
    S, lower = s.support, s.lower
    y = lower.copy()
    if s.free_mass == 0:
        return y
    if isinstance(f, NegativeEntropy):
        if np.any(lower[S] < 0):
            raise InfeasibleError("negative lower bound is outside dom f")
        if not np.any(lower[S] > 0):
            y[S] = s.free_mass * x[S] / np.sum(x[S])
            return y
    theta = f.grad(x[S])
    lo_S = lower[S]
    target = s.scale - float(lower[~S].sum())
    mu = _simplex_multiplier(f, theta, lo_S, target)
    t = theta + mu
    with np.errstate(divide="ignore"):
        t_lo = f.grad(lo_S)
    # Dual values within rounding of the bound are pinned there and the
    # multiplier is recomputed on the free coordinates only. Without this,
    # steep grad f* near the bound (p > 2) turns an O(eps) error in mu into
    # O(sqrt(eps)) mass on coordinates that belong on the bound.
    pinned = (t > t_lo) & (t - t_lo <= 64 * np.finfo(float).eps * (1.0 + np.abs(t) + np.abs(t_lo)))
    if np.any(pinned) and not np.all(pinned):
        free = ~pinned
        mu = _simplex_multiplier(f, theta[free], lo_S[free], target - float(lo_S[pinned].sum()))
        t = theta + mu
        t[pinned] = -np.inf
    with np.errstate(over="ignore"):
        y[S] = np.maximum(f.grad_conj(t), lo_S)
    return y


def _simplex_multiplier(f, theta, lo, target):
    """``mu`` with ``sum max(grad f*(theta + mu), lo) = target``."""

    def mass(mu):
        with np.errstate(over="ignore"):
            v = float(np.sum(np.maximum(f.grad_conj(theta + mu), lo))) - target
        return np.inf if np.isnan(v) else v

    def dmass(mu):
        t = theta + mu
        act = f.grad_conj(t) > lo
        return float(np.sum(f.conj_hessian_diag(t[act]))) if np.any(act) else 0.0

    v0 = mass(0.0)
    if v0 == 0.0:
        return 0.0
    if v0 < 0:
        return _scalar_root(mass, 0.0, _expand(mass, 0.0, +1), x0=0.0, dphi=dmass)
    return _scalar_root(mass, _expand(mass, 0.0, -1), 0.0, x0=0.0, dphi=dmass)


def _ball_inner(f, theta, c, mu):
    """Minimizer of ``D_f(y, x) + mu ||y - c||^2 / 2`` and its mu-derivative."""
    if isinstance(f, QuadraticForm):
        M = f.Q + mu * np.eye(c.size)
        y = np.linalg.solve(M, theta + mu * c)
        return y, -np.linalg.solve(M, y - c)
    r = theta + mu * c
    if isinstance(f, NegativeEntropy):
        # 1 + s + mu e^s = r in the log variable s = log y
        hi = r - 1.0
        lo = hi - mu * np.exp(np.minimum(hi, 700.0))
        s = _vector_root(lambda s: 1.0 + s + mu * np.exp(s) - r,
                         lambda s: 1.0 + mu * np.exp(s), lo, hi)
        y = np.exp(s)
    elif f.kind == "squared_norm":
        y = r / (1.0 + mu)
    else:
        p = f.p
        ar = np.abs(r)
        hi = ar ** (1.0 / (p - 1.0))
        if mu > 0:
            hi = np.minimum(hi, ar / mu)
        t = _vector_root(lambda t: t ** (p - 1.0) + mu * t - ar,
                         lambda t: (p - 1.0) * t ** (p - 2.0) + mu, np.zeros_like(ar), hi)
        y = np.sign(r) * t
    h = f.hessian_diag(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        dy = -(y - c) / (h + mu)
    dy = np.where(np.isfinite(dy), dy, 0.0)
    return y, dy


def _vector_root(fun, dfun, lo, hi, steps=200):
    """Componentwise root of increasing functions on brackets ``[lo, hi]``."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x = 0.5 * (lo + hi)
    for _ in range(steps):
        v = fun(x)
        lo = np.where(v < 0, x, lo)
        hi = np.where(v > 0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - v / dfun(x)
        ok = np.isfinite(xn) & (xn > lo) & (xn < hi)
        xn = np.where(ok, xn, 0.5 * (lo + hi))
        done = np.abs(xn - x) <= 4e-16 * (1.0 + np.abs(x))
        x = np.where(v == 0, x, xn)
        if np.all(done | (v == 0) | (hi - lo <= 4e-16 * (1.0 + np.abs(x)))):
            return x
    raise ConvergenceError("componentwise root search did not converge")


def _project_ball(f, s, x):
    c, R = s.center, s.radius
    if isinstance(f, NegativeEntropy) and not np.linalg.norm(np.maximum(-c, 0.0)) < R:
        raise InfeasibleError("ball misses the open positive orthant")
    theta = f.grad(x)
    cache = {}

    def inner(mu):
        if mu not in cache:
            cache.clear()
            cache[mu] = _ball_inner(f, theta, c, mu)
        return cache[mu]

    # ||y(mu) - c|| decreases in mu; its reciprocal is nearly linear
    def phi(mu):
        y, _ = inner(mu)
        return 1.0 / np.linalg.norm(y - c) - 1.0 / R

    def dphi(mu):
        y, dy = inner(mu)
        v = y - c
        return -float(v @ dy) / np.linalg.norm(v) ** 3

    hi = _expand(phi, 0.0, +1)
    if hi is None:
        raise InfeasibleError("ball multiplier search diverged")
    mu = _scalar_root(phi, 0.0, hi, x0=0.0, dphi=dphi)
    y, _ = _ball_inner(f, theta, c, mu)
    return y


def _initial_interior(f, s, x):
    y = s.euclidean_project(x)
    if f.in_interior(y):
        return y
    w = s.barycenter()
    for t in (0.5, 0.9, 0.99, 1.0):
        z = (1.0 - t) * y + t * w
        if f.in_interior(z) and s.contains(z):
            return z
    raise InfeasibleError("no starting point in set and int dom f")


def _project_generic(f, s, x, max_iter=MAX_ITER, tol=PG_TOL):
    """Projected gradient with Barzilai-Borwein steps and Armijo backtracking.

    Near the solution the objective changes fall below the rounding level
    of its value. There the change is estimated from the gradients at both
    ends of the step, and if even that is lost in rounding a step is
    accepted when it halves the natural residual.
    """
    theta = f.grad(x)
    y = _initial_interior(f, s, x)

    def obj(v):
        return f.value(v) - float(theta @ v)

    def residual(v, gv):
        return np.linalg.norm(v - s.euclidean_project(v - gv))

    g = f.grad(y) - theta
    fy = obj(y)
    res = residual(y, g)
    step = 1.0
    stalled = 0
    for _ in range(max_iter):
        scale = 1.0 + np.linalg.norm(y)
        if res <= tol * scale:
            return y
        # an inexact inner oracle can leave a residual floor the steps cannot remove
        if stalled >= STALL_STEPS and res <= STALL_TOL * scale:
            return y
        t = step
        accepted = False
        for _ in range(80):
            yn = s.euclidean_project(y - t * g)
            if not (yn != y).any():
                # a step too short to register; retry once at unit length
                if t >= 1.0:
                    break
                t = step = 1.0
                continue
            if f.in_interior(yn):
                fn = obj(yn)
                gn = f.grad(yn) - theta
                change = fn - fy
                if abs(change) <= 1e-10 * (1.0 + abs(fy)):
                    change = 0.5 * float((g + gn) @ (yn - y))
                if change <= 1e-4 * float(g @ (yn - y)):
                    res_n = residual(yn, gn)
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            for k in range(20):
                yn = s.euclidean_project(y - step * 0.5 ** k * g)
                if f.in_interior(yn):
                    gn = f.grad(yn) - theta
                    res_n = residual(yn, gn)
                    if res_n <= 0.5 * res:
                        fn = obj(yn)
                        change = fn - fy
                        t = step * 0.5 ** k
                        break
            else:
                # the residual left is at the accuracy of the inner Euclidean oracle
                if res <= STALL_TOL * scale * (1.0 + np.linalg.norm(g)):
                    return y
                raise ConvergenceError("projected gradient found no descent step")
        stalled = stalled + 1 if change >= -1e-15 * (1.0 + abs(fy)) else 0
        sy, ss = float((yn - y) @ (gn - g)), float((yn - y) @ (yn - y))
        step = ss / sy if sy > 0 else 2.0 * t
        y, g, fy, res = yn, gn, fn, res_n
    raise ConvergenceError(f"projected gradient exceeded {max_iter} iterations")


def bregman_project(f, C, x, max_iter=MAX_ITER):
    """Bregman projection of ``x`` onto ``C`` with respect to ``f``.

    Parameters
    ----------
    f : LegendreFunction
    C : ConvexSet
    x : array_like
        Point in ``int dom f``.
    max_iter : int
        Cap for the iterative fallback solver.

    Returns
    -------
    ndarray
        The unique ``z`` in ``C`` minimizing ``D_f(z, x)``; ``x`` itself
        when ``x`` already lies in ``C``.

    Raises
    ------
    InfeasibleError
        If ``C`` does not meet ``int dom f``.
    ConvergenceError
        If the iterative fallback exceeds ``max_iter`` iterations.
    """
    x = check_interior(f, x)
    if x.size != C.dim:
        raise ArgumentError(f"x has dimension {x.size}, set has {C.dim}")
    if C.contains(x, 0.0):
        return x.copy()
    if isinstance(C, Hyperplane):
        z = _project_affine(f, C, x, equality=True)
    elif isinstance(C, Halfspace):
        z = _project_affine(f, C, x, equality=False)
    elif isinstance(C, Box) and f.separable:
        z = _project_box(f, C, x)
    elif isinstance(C, Simplex) and f.separable:
        z = _project_simplex_separable(f, C, x)
    elif isinstance(C, Ball):
        z = _project_ball(f, C, x)
    else:
        z = _project_generic(f, C, x, max_iter=max_iter)
    return z


def projection_vi_residual(f, C, x, z, probes):
    """``max_y <grad f(x) - grad f(z), y - z>`` over probe points ``y`` of ``C``.

    Nonpositive (up to solver tolerance) exactly when ``z`` is the Bregman
    projection of ``x``.
    """
    x = check_interior(f, x)
    z = check_interior(f, z, "z")
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    bad = [i for i, y in enumerate(probes) if not C.contains(y)]
    if bad:
        raise ArgumentError(f"probe {bad[0]} is not in the set")
    return float(np.max((probes - z) @ (f.grad(x) - f.grad(z))))


def pythagoras_gap(f, C, x, y):
    """``D(y, x) - D(y, P) - D(P, x)`` for ``P`` the projection of ``x``; nonnegative."""
    x = check_interior(f, x)
    y = np.asarray(y, dtype=float)
    if not C.contains(y):
        raise ArgumentError("y must lie in the set")
    P = bregman_project(f, C, x)
    return _dist(f, y, x) - _dist(f, y, P) - _dist(f, P, x)
