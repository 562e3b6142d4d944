"""Monotone bifunctions, their Bregman resolvents and certificate checks.

Two families are supported, both satisfying the standard equilibrium
conditions (A1)-(A4) when constructed with valid data:

* :class:`LinearMonotone`, ``g(x, y) = <A x + c, y - x>`` with ``A + A^T``
  positive semidefinite;
* :class:`ProximalConvex`, ``g(x, y) = h(y) - h(x)`` for a polyhedral
  convex ``h`` from a small catalog.

The resolvent of ``g`` at ``x`` is the unique ``z`` in ``C`` with
``g(z, y) + <grad f(z) - grad f(x), y - z> >= 0`` for all ``y`` in ``C``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ConvergenceError, DomainError, InfeasibleError
from .geometry import _dist, check_interior
from .legendre import as_point
from .projection import bregman_project
from .rng import make_rng
from .sets import Box, MEMBERSHIP_TOL, project_simplex_sorted

RESOLVENT_TOL = 1e-10
RESOLVENT_MAX_ITER = 50_000
DUAL_MAX_ITER = 5_000
N_PROBES = 128


# -- convex pieces for ProximalConvex ---------------------------------------

class ConvexPiece:
    """Polyhedral convex ``h(y) = max_{w in W} <w, y>`` with a projectable ``W``."""

    kind = None

    def __call__(self, Y):
        raise NotImplementedError

    def project_support(self, w):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class ZeroPiece(ConvexPiece):
    """``h = 0``; the bifunction is identically zero."""

    kind = "zero"

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float)
        return np.zeros(Y.shape[:-1]) if Y.ndim > 1 else 0.0

    def project_support(self, w):
        return np.zeros_like(w)

    def to_dict(self):
        return {"kind": self.kind}


class LinearPiece(ConvexPiece):
    """``h(y) = <c, y>``."""

    kind = "linear"

    def __init__(self, c):
        self.c = as_point(c, "c")

    def __call__(self, Y):
        return np.asarray(Y, dtype=float) @ self.c

    def project_support(self, w):
        return self.c.copy()

    def to_dict(self):
        return {"kind": self.kind, "c": self.c.tolist()}


class WeightedL1(ConvexPiece):
    """``h(y) = sum w_i |y_i|`` with nonnegative weights."""

    kind = "weighted_l1"

    def __init__(self, weights):
        self.weights = as_point(weights, "weights")
        if np.any(self.weights < 0):
            raise ArgumentError("weights must be nonnegative")

    def __call__(self, Y):
        return np.abs(np.asarray(Y, dtype=float)) @ self.weights

    def project_support(self, w):
        return np.clip(w, -self.weights, self.weights)

    def to_dict(self):
        return {"kind": self.kind, "weights": self.weights.tolist()}


class MaxCoordinate(ConvexPiece):
    """``h(y) = s * max_i y_i`` with ``s > 0``."""

    kind = "max_coordinate"

    def __init__(self, scale=1.0):
        self.scale = float(scale)
        if not self.scale > 0:
            raise ArgumentError("scale must be positive")

    def __call__(self, Y):
        return self.scale * np.max(np.asarray(Y, dtype=float), axis=-1)

    def project_support(self, w):
        return project_simplex_sorted(w, self.scale)

    def to_dict(self):
        return {"kind": self.kind, "scale": self.scale}


def piece_from_dict(spec):
    kind = spec.get("kind")
    if kind == "zero":
        return ZeroPiece()
    if kind == "linear":
        return LinearPiece(spec["c"])
    if kind == "weighted_l1":
        return WeightedL1(spec["weights"])
    if kind == "max_coordinate":
        return MaxCoordinate(spec.get("scale", 1.0))
    raise ArgumentError(f"unknown convex piece {kind!r}")


# -- bifunctions -------------------------------------------------------------

class Bifunction:
    """``g: C x C -> R``. ``value(x, Y)`` is vectorized over rows of ``Y``."""

    def __init__(self, feasible_set):
        self.feasible_set = feasible_set
        self.dim = feasible_set.dim

    def value(self, x, Y):
        raise NotImplementedError

    def __call__(self, x, y):
        return float(self.value(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))


class LinearMonotone(Bifunction):
    """``g(x, y) = <A x + c, y - x>``.

    Monotone exactly when the symmetric part of ``A`` is positive
    semidefinite. Construction does not enforce this so that invalid
    instances can be fed to :func:`check_axioms`.
    """

    def __init__(self, A, c, feasible_set):
        super().__init__(feasible_set)
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.c = np.zeros(self.dim) if c is None else as_point(c, "c")
        if self.A.shape != (self.dim, self.dim) or self.c.size != self.dim:
            raise ArgumentError("A must be d x d and c of length d")

    def value(self, x, Y):
        return (Y - x) @ (self.A @ x + self.c)

    def operator(self, z):
        return self.A @ z + self.c

    def is_monotone(self, tol=1e-12):
        return bool(np.min(np.linalg.eigvalsh(self.A + self.A.T)) >= -tol)

    def to_dict(self):
        return {"type": "linear_monotone", "A": self.A.tolist(), "c": self.c.tolist(),
                "set": self.feasible_set.to_dict()}

    def __repr__(self):
        return f"LinearMonotone(A={self.A.tolist()}, c={self.c.tolist()})"


class ProximalConvex(Bifunction):
    """``g(x, y) = h(y) - h(x)``; its equilibria are the minimizers of ``h`` on ``C``."""

    def __init__(self, h, feasible_set):
        super().__init__(feasible_set)
        self.h = h

    def value(self, x, Y):
        return self.h(Y) - self.h(x)

    def to_dict(self):
        return {"type": "proximal_convex", "h": self.h.to_dict(),
                "set": self.feasible_set.to_dict()}

    def __repr__(self):
        return f"ProximalConvex(h={self.h.to_dict()})"


def bifunction_from_dict(spec):
    from .sets import set_from_dict

    C = set_from_dict(spec["set"])
    if spec.get("type") == "linear_monotone":
        return LinearMonotone(spec["A"], spec.get("c"), C)
    if spec.get("type") == "proximal_convex":
        return ProximalConvex(piece_from_dict(spec["h"]), C)
    raise ArgumentError(f"unknown bifunction type {spec.get('type')!r}")


# -- resolvent ---------------------------------------------------------------

def _interior_start(f, C, x):
    y = C.euclidean_project(x)
    if f.in_interior(y):
        return y
    w = C.barycenter()
    for t in (0.5, 0.9, 0.99, 1.0):
        z = (1.0 - t) * y + t * w
        if f.in_interior(z) and C.contains(z):
            return z
    raise InfeasibleError("feasible set misses int dom f")


def _extragradient(F, proj, z, inside, tol, max_iter):
    """Extragradient with step halving for a monotone VI over a convex set.

    ``F`` is the operator, ``proj`` the Euclidean projection onto the set
    and ``inside`` a domain predicate that rejected trial points must fail.
    Stops on the natural residual ``||z - proj(z - F(z))||``.
    """
    t = 1.0
    Fz = F(z)
    for _ in range(max_iter):
        if np.linalg.norm(z - proj(z - Fz)) <= tol * (1.0 + np.linalg.norm(z)):
            return z
        for _ in range(100):
            w = proj(z - t * Fz)
            if inside(w):
                Fw = F(w)
                if t * np.linalg.norm(Fw - Fz) <= 0.9 * np.linalg.norm(w - z):
                    zn = proj(z - t * Fw)
                    if inside(zn):
                        break
            t *= 0.5
        else:
            raise ConvergenceError("extragradient step size underflow")
        z = zn
        Fz = F(z)
        t *= 1.25
    raise ConvergenceError(f"extragradient exceeded {max_iter} iterations")


def _newton_interior(f, A, c, theta, x, iters=60):
    """Unconstrained root of ``A z + c + grad f(z) - theta`` by damped Newton."""
    z = x.copy()
    for _ in range(iters):
        r = A @ z + c + f.grad(z) - theta
        if np.linalg.norm(r) <= 1e-14 * (1.0 + np.linalg.norm(theta)):
            return z
        step = np.linalg.solve(A + f.hessian(z), r)
        t = 1.0
        while t > 1e-12:
            zn = z - t * step
            if f.in_interior(zn) and np.linalg.norm(A @ zn + c + f.grad(zn) - theta) < \
                    (1.0 - 1e-4 * t) * np.linalg.norm(r) + 1e-300:
                break
            t *= 0.5
        else:
            return None
        z = zn
    r = A @ z + c + f.grad(z) - theta
    return z if np.linalg.norm(r) <= 1e-12 * (1.0 + np.linalg.norm(theta)) else None


def _resolve_linear(f, g, x, tol, max_iter):
    C = g.feasible_set
    theta = f.grad(x)
    if f.kind in ("squared_norm", "quadratic_form"):
        H = f.hessian(x)
        try:
            z = np.linalg.solve(g.A + H, H @ x - g.c)
        except np.linalg.LinAlgError:
            z = None
    else:
        try:
            z = _newton_interior(f, g.A, g.c, theta, x)
        except np.linalg.LinAlgError:
            z = None
    if z is not None and C.contains(z, 0.0):
        return z

    def F(v):
        return g.A @ v + g.c + f.grad(v) - theta

    return _extragradient(F, C.euclidean_project, _interior_start(f, C, x),
                          f.in_interior, tol, max_iter)


def _prox_unconstrained(f, h, theta):
    """Exact minimizer of ``h(z) + D_f(z, x)`` over all of ``dom f`` (separable f)."""
    if isinstance(h, WeightedL1):
        if f.zero_interior:
            shrunk = np.sign(theta) * np.maximum(np.abs(theta) - h.weights, 0.0)
        else:
            shrunk = theta - h.weights
        return f.grad_conj(shrunk)
    if isinstance(h, MaxCoordinate):
        # dual threshold eta with sum (theta_i - eta)_+ = scale
        eta = float(np.max(theta - project_simplex_sorted(theta, h.scale)))
        return f.grad_conj(np.minimum(theta, eta))
    return None


def _dual_ascent(f, C, h, theta, tol, max_iter):
    """Projected gradient ascent on the dual of the proximal resolvent.

    ``h`` is the support function of a compact ``W``, so the resolvent is
    ``z(w*)`` where ``w*`` maximizes the concave dual
    ``psi(w) = min_{z in C} <w, z> + f(z) - <theta, z>`` over ``W``; its
    gradient is ``z(w) = P_C(grad f*(theta - w))``, one exact projection.
    """
    def primal(w):
        z = bregman_project(f, C, f.grad_conj(theta - w))
        return z, float(w @ z) + f.value(z) - float(theta @ z)

    w = h.project_support(np.zeros(theta.size))
    z, val = primal(w)
    step, stalled = 1.0, 0
    for _ in range(min(max_iter, DUAL_MAX_ITER)):
        res = np.linalg.norm(w - h.project_support(w + z))
        scale = 1.0 + np.linalg.norm(w)
        if res <= tol * scale or (stalled >= 20 and res <= 1e-8 * scale):
            return z
        t = step
        for _ in range(60):
            wn = h.project_support(w + t * z)
            zn, vn = primal(wn)
            if vn >= val + 1e-4 * float(z @ (wn - w)) - 1e-15 * (1.0 + abs(val)):
                break
            t *= 0.5
        else:
            raise ConvergenceError("dual ascent found no increase")
        stalled = stalled + 1 if vn <= val + 1e-15 * (1.0 + abs(val)) else 0
        sw, sz = wn - w, zn - z
        curv = -float(sw @ sz)
        step = float(sw @ sw) / curv if curv > 0 else 2.0 * t
        w, z, val = wn, zn, vn
    raise ConvergenceError("dual ascent exceeded its iteration cap")


def _resolve_proximal(f, g, x, tol, max_iter):
    C, h = g.feasible_set, g.h
    theta = f.grad(x)
    if isinstance(h, ZeroPiece):
        return bregman_project(f, C, x)
    if isinstance(h, LinearPiece):
        return bregman_project(f, C, f.grad_conj(theta - h.c))
    if f.separable:
        z = _prox_unconstrained(f, h, theta)
        if isinstance(h, WeightedL1) and isinstance(C, Box):
            # separable objective over a box: clamp each coordinate
            return np.clip(z, C.lo, C.hi)
        if z is not None and C.contains(z, 0.0):
            return z
    try:
        return _dual_ascent(f, C, h, theta, tol, max_iter)
    except (ConvergenceError, DomainError):
        pass
    # saddle form: min_z max_{w in W} <w, z> + f(z) - <theta, z>
    d = x.size

    def F(v):
        z, w = v[:d], v[d:]
        return np.concatenate([w + f.grad(z) - theta, -z])

    def proj(v):
        return np.concatenate([C.euclidean_project(v[:d]), h.project_support(v[d:])])

    z0 = _interior_start(f, C, x)
    v = _extragradient(F, proj, np.concatenate([z0, h.project_support(np.zeros(d))]),
                       lambda v: f.in_interior(v[:d]), tol, max_iter)
    return v[:d]


def resolve(f, g, x, tol=RESOLVENT_TOL, max_iter=RESOLVENT_MAX_ITER):
    """Bregman resolvent ``Res^f_g(x)``.

    Parameters
    ----------
    f : LegendreFunction
    g : Bifunction
    x : array_like
        Point of ``int dom f`` (need not lie in ``C``).
    tol : float
        Natural-residual tolerance for the iterative fallback.
    max_iter : int
        Iteration cap of the fallback.

    Returns
    -------
    ndarray
        The unique ``z`` in ``C`` solving the resolvent inequality.
    """
    x = check_interior(f, x)
    if x.size != g.dim:
        raise ArgumentError("dimension mismatch between x and bifunction")
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    if isinstance(g, LinearMonotone):
        return _resolve_linear(f, g, x, tol, max_iter)
    if isinstance(g, ProximalConvex):
        return _resolve_proximal(f, g, x, tol, max_iter)
    raise ArgumentError(f"unsupported bifunction {type(g).__name__}")


def resolvent_residual(f, g, x, z, probes):
    """``max_y -g(z, y) - <grad f(z) - grad f(x), y - z>`` over probes (clipped at 0)."""
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    vals = -g.value(z, probes) - (probes - z) @ (f.grad(z) - f.grad(x))
    return max(0.0, float(np.max(vals)))


def ep_residual(g, z, n_probes=N_PROBES, seed=0, probes=None):
    """Approximate ``sup_{y in C} -g(z, y)``; near zero certifies ``z`` in EP(g).

    The supremum is taken over the set's vertices plus ``n_probes`` seeded
    interior and boundary samples (or explicit ``probes``), and includes
    ``y = z`` so the result is never negative.
    """
    z = as_point(z, "z")
    C = g.feasible_set
    if not C.contains(z):
        raise ArgumentError("z is not in the feasible set")
    if probes is None:
        probes = C.probe_points(n_probes // 2, n_probes - n_probes // 2, seed)
    return max(0.0, float(np.max(-g.value(z, probes))))


def resolvent_inequality_gap(f, g, x, q, tol=1e-7):
    """``D(q, x) - D(q, z) - D(z, x)`` with ``z = Res(x)``; nonnegative for ``q`` in EP(g)."""
    x = check_interior(f, x)
    q = as_point(q, "q")
    if ep_residual(g, q) > tol:
        raise ArgumentError("q is not an equilibrium point within tolerance")
    z = resolve(f, g, x)
    return _dist(f, q, x) - _dist(f, q, z) - _dist(f, z, x)


def firmly_nonexpansive_gap(f, g, x, y):
    """``<grad f(x) - grad f(y), Tx - Ty> - <grad f(Tx) - grad f(Ty), Tx - Ty>`` for ``T = Res``."""
    x = check_interior(f, x)
    y = check_interior(f, y, "y")
    Tx, Ty = resolve(f, g, x), resolve(f, g, y)
    diff = Tx - Ty
    return float((f.grad(x) - f.grad(y)) @ diff - (f.grad(Tx) - f.grad(Ty)) @ diff)


# -- axiom checks ------------------------------------------------------------

@dataclass
class AxiomCheck:
    name: str
    passed: bool
    worst: float
    witness: dict = field(default_factory=dict)


@dataclass
class AxiomReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "worst": c.worst,
                            "witness": c.witness} for c in self.checks]}


HEMI_STEPS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


AXIOM_LIMITS = {"A1": 1e-12, "A2": 1e-10, "A3": 1e-8, "A4": 1e-10}


def check_axioms(g, n_samples=200, seed=0):
    """Sample the four equilibrium conditions and report the worst violations.

    (A3) estimates ``lim_{t -> 0+} g(x + t (z - x), y)`` by linear
    extrapolation from the two smallest steps of :data:`HEMI_STEPS`; the
    raw values at finite ``t`` still carry an ``O(t)`` drift.
    """
    C = g.feasible_set
    pts = C.probe_points(n_samples, n_samples, seed)
    rng = make_rng(seed).spawn(1)
    idx = rng.integers(pts.shape[0], (n_samples, 3))
    lam = rng.uniform(n_samples)
    worst = {k: (-np.inf, {}) for k in ("A1", "A2", "A3", "A4")}

    def note(key, val, **wit):
        if val > worst[key][0]:
            worst[key] = (float(val), {k: np.asarray(v).tolist() for k, v in wit.items()})

    for (i, j, k), t in zip(idx, lam):
        x, y, z = pts[i], pts[j], pts[k]
        note("A1", abs(g(x, x)), x=x)
        note("A2", g(x, y) + g(y, x), x=x, y=y)
        gxy = g(x, y)
        tail = [g(x + s * (z - x), y) for s in HEMI_STEPS]
        t1, t2 = HEMI_STEPS[-1], HEMI_STEPS[-2]
        limit = tail[-1] - (tail[-2] - tail[-1]) * t1 / (t2 - t1)
        note("A3", (limit - gxy) / (1.0 + abs(gxy)), x=x, y=y, z=z)
        lhs = g(x, t * y + (1 - t) * z)
        rhs = t * gxy + (1 - t) * g(x, z)
        note("A4", (lhs - rhs) / (1.0 + abs(rhs)), x=x, y=y, z=z, t=t)
    return AxiomReport([AxiomCheck(k, worst[k][0] <= AXIOM_LIMITS[k], worst[k][0], worst[k][1])
                        for k in ("A1", "A2", "A3", "A4")])
