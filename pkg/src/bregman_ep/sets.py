"""Closed convex subsets of R^d.

Every set carries a witness point, tests membership with an additive
tolerance, computes its Euclidean projection, and can draw a
deterministic family of probe points (vertices, interior and boundary
samples) used wherever a supremum over the set has to be approximated.
"""

import numpy as np

from .errors import ArgumentError, ConvergenceError, InfeasibleError
from .legendre import as_point
from .rng import make_rng

MEMBERSHIP_TOL = 1e-9
#: Radius of the sampling window for unbounded sets, centred at the witness.
PROBE_RADIUS = 10.0
MAX_VERTEX_DIM = 10


class ConvexSet:
    dim = None
    bounded = True

    def contains(self, x, tol=MEMBERSHIP_TOL):
        raise NotImplementedError

    def violation(self, x):
        """Nonnegative amount by which ``x`` fails membership."""
        raise NotImplementedError

    def violation_rows(self, X):
        """:meth:`violation` for each row of ``X``."""
        return np.array([self.violation(x) for x in np.asarray(X, dtype=float)])

    def euclidean_project(self, x):
        raise NotImplementedError

    def witness(self):
        raise NotImplementedError

    def barycenter(self):
        """A canonical central point of the set (the witness unless overridden)."""
        return self.witness()

    def vertices(self):
        return np.empty((0, self.dim))

    def _sample(self, rng, n):
        """``n`` points of the set, roughly spread over it (or over the window)."""
        w = self.witness()
        pts = w + PROBE_RADIUS * rng.uniform((n, self.dim), -1.0, 1.0)
        return self._interiorize(rng, np.array([self.euclidean_project(p) for p in pts]))

    def _interiorize(self, rng, boundary):
        t = rng.uniform((boundary.shape[0], 1))
        return t * self.barycenter() + (1.0 - t) * boundary

    def _boundary(self, rng, n):
        w = self.witness()
        out = []
        for _ in range(n):
            # push far out along a random direction and project back
            u = rng.unit_vectors(1, self.dim)[0]
            out.append(self.euclidean_project(w + 4.0 * PROBE_RADIUS * u))
        return np.array(out).reshape(n, self.dim)

    def probe_points(self, n_interior=64, n_boundary=64, seed=0):
        """Vertices plus seeded interior and boundary samples, all inside the set."""
        rng = make_rng(seed)
        parts = [self.vertices()]
        if n_interior:
            parts.append(self._sample(rng, n_interior))
        if n_boundary:
            parts.append(self._boundary(rng, n_boundary))
        return np.vstack(parts)

    def to_dict(self):
        raise NotImplementedError


def _normal(a):
    a = as_point(a, "a")
    norm = np.linalg.norm(a)
    if not norm > 0:
        raise ArgumentError("normal vector a must be nonzero")
    return a, norm


class Halfspace(ConvexSet):
    """``{x : <a, x> <= b}``."""

    bounded = False

    def __init__(self, a, b):
        self.a, self._norm = _normal(a)
        self.b = float(b)
        self.dim = self.a.size

    def violation(self, x):
        return max(0.0, (float(self.a @ x) - self.b) / self._norm)

    def violation_rows(self, X):
        return np.maximum(0.0, (np.asarray(X) @ self.a - self.b) / self._norm)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return self.violation(x) <= tol

    def euclidean_project(self, x):
        s = float(self.a @ x) - self.b
        if s <= 0.0:
            return np.array(x, dtype=float)
        return x - (s / self._norm**2) * self.a

    def witness(self):
        return (self.b / self._norm**2) * self.a

    def _sample(self, rng, n):
        pts = self.witness() + PROBE_RADIUS * rng.uniform((n, self.dim), -1.0, 1.0)
        s = pts @ self.a - self.b
        # reflect the outside half across the boundary
        flip = np.maximum(s, 0.0) * 2.0 / self._norm**2
        return pts - flip[:, None] * self.a

    def _boundary(self, rng, n):
        pts = self.witness() + PROBE_RADIUS * rng.uniform((n, self.dim), -1.0, 1.0)
        s = pts @ self.a - self.b
        return pts - (s / self._norm**2)[:, None] * self.a

    def to_dict(self):
        return {"type": "halfspace", "a": self.a.tolist(), "b": self.b}

    def __repr__(self):
        return f"Halfspace(a={self.a.tolist()}, b={self.b})"


class Hyperplane(Halfspace):
    """``{x : <a, x> = b}``."""

    def violation(self, x):
        return abs(float(self.a @ x) - self.b) / self._norm

    def violation_rows(self, X):
        return np.abs(np.asarray(X) @ self.a - self.b) / self._norm

    def euclidean_project(self, x):
        s = float(self.a @ x) - self.b
        return x - (s / self._norm**2) * self.a

    def _sample(self, rng, n):
        return self._boundary(rng, n)

    def to_dict(self):
        return {"type": "hyperplane", "a": self.a.tolist(), "b": self.b}

    def __repr__(self):
        return f"Hyperplane(a={self.a.tolist()}, b={self.b})"


class Box(ConvexSet):
    """``{x : lo <= x <= hi}`` componentwise."""

    def __init__(self, lo, hi):
        self.lo = as_point(lo, "lo")
        self.hi = as_point(hi, "hi")
        if self.lo.shape != self.hi.shape:
            raise ArgumentError("lo and hi must have the same shape")
        if np.any(self.lo > self.hi):
            raise InfeasibleError("box is empty: some lo > hi")
        self.dim = self.lo.size

    @classmethod
    def cube(cls, d, half_width):
        return cls(-half_width * np.ones(d), half_width * np.ones(d))

    def violation(self, x):
        return float(max(np.max(self.lo - x), np.max(x - self.hi), 0.0))

    def violation_rows(self, X):
        X = np.asarray(X)
        return np.maximum(np.maximum(self.lo - X, X - self.hi).max(axis=1), 0.0)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return self.violation(x) <= tol

    def euclidean_project(self, x):
        return np.clip(x, self.lo, self.hi)

    def witness(self):
        return 0.5 * (self.lo + self.hi)

    def vertices(self):
        if self.dim > MAX_VERTEX_DIM:
            return np.empty((0, self.dim))
        bits = (np.arange(2**self.dim)[:, None] >> np.arange(self.dim)) & 1
        return np.where(bits == 1, self.hi, self.lo)

    def _sample(self, rng, n):
        return self.lo + (self.hi - self.lo) * rng.uniform((n, self.dim))

    def _boundary(self, rng, n):
        pts = self._sample(rng, n)
        k = rng.integers(self.dim, n)
        side = rng.integers(2, n)
        pts[np.arange(n), k] = np.where(side == 1, self.hi[k], self.lo[k])
        return pts

    def to_dict(self):
        return {"type": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class Ball(ConvexSet):
    """Closed Euclidean ball ``{x : ||x - center|| <= radius}``."""

    def __init__(self, center, radius):
        self.center = as_point(center, "center")
        self.radius = float(radius)
        if not self.radius > 0:
            raise ArgumentError("radius must be positive")
        self.dim = self.center.size

    def violation(self, x):
        return max(0.0, float(np.linalg.norm(x - self.center)) - self.radius)

    def violation_rows(self, X):
        return np.maximum(0.0, np.linalg.norm(np.asarray(X) - self.center, axis=1) - self.radius)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return self.violation(x) <= tol

    def euclidean_project(self, x):
        v = x - self.center
        n = np.linalg.norm(v)
        if n <= self.radius:
            return np.array(x, dtype=float)
        return self.center + (self.radius / n) * v

    def witness(self):
        return self.center.copy()

    def _sample(self, rng, n):
        u = rng.unit_vectors(n, self.dim)
        r = self.radius * rng.uniform((n, 1)) ** (1.0 / self.dim)
        return self.center + r * u

    def _boundary(self, rng, n):
        return self.center + self.radius * rng.unit_vectors(n, self.dim)

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


def project_simplex_sorted(x, scale=1.0):
    """Euclidean projection onto ``{x >= 0, sum x = scale}`` by sorting."""
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - scale
    k = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(x - theta, 0.0)


class Simplex(ConvexSet):
    """Scaled simplex ``{x >= lower : sum x = scale}`` in R^d.

    ``lower`` defaults to zero (the usual probability simplex times
    ``scale``). An optional boolean ``support`` pins every coordinate
    outside the support at its lower bound, which describes a face.
    """

    def __init__(self, dim, scale=1.0, support=None, lower=None):
        self.dim = int(dim)
        if self.dim < 1:
            raise ArgumentError("dim must be at least 1")
        self.scale = float(scale)
        if not self.scale > 0:
            raise ArgumentError("scale must be positive")
        if support is None:
            support = np.ones(self.dim, dtype=bool)
        self.support = np.asarray(support, dtype=bool)
        if self.support.shape != (self.dim,) or not self.support.any():
            raise ArgumentError("support must be a non-empty mask of length dim")
        self.lower = np.zeros(self.dim) if lower is None else as_point(lower, "lower")
        if self.lower.shape != (self.dim,):
            raise ArgumentError("lower must have length dim")
        self.is_face = not bool(self.support.all())
        #: mass left for the free coordinates above their lower bounds
        self.free_mass = self.scale - float(self.lower.sum())
        if self.free_mass < 0:
            raise InfeasibleError("lower bounds exceed the simplex scale")

    def violation(self, x):
        off = float(np.max(np.abs(x - self.lower)[~self.support])) if self.is_face else 0.0
        return float(max(abs(np.sum(x) - self.scale), np.max(self.lower - x), off, 0.0))

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return self.violation(x) <= tol

    def euclidean_project(self, x):
        out = self.lower.copy()
        S = self.support
        out[S] += project_simplex_sorted(np.asarray(x, dtype=float)[S] - self.lower[S],
                                         self.free_mass) if self.free_mass > 0 else 0.0
        return out

    def witness(self):
        out = self.lower.copy()
        out[self.support] += self.free_mass / self.support.sum()
        return out

    def vertices(self):
        return self.lower + self.free_mass * np.eye(self.dim)[self.support]

    def _dirichlet(self, rng, n, drop_one):
        k = int(self.support.sum())
        e = -np.log1p(-rng.uniform((n, k)))
        if drop_one and k > 1:
            e[np.arange(n), rng.integers(k, n)] = 0.0
        out = np.tile(self.lower, (n, 1))
        out[:, self.support] += self.free_mass * e / e.sum(axis=1, keepdims=True)
        return out

    def _sample(self, rng, n):
        return self._dirichlet(rng, n, False)

    def _boundary(self, rng, n):
        return self._dirichlet(rng, n, True)

    def to_dict(self):
        out = {"type": "simplex", "dim": self.dim, "scale": self.scale}
        if self.is_face:
            out["support"] = self.support.tolist()
        if np.any(self.lower != 0):
            out["lower"] = self.lower.tolist()
        return out

    def __repr__(self):
        extra = f", support={self.support.tolist()}" if self.is_face else ""
        if np.any(self.lower != 0):
            extra += f", lower={self.lower.tolist()}"
        return f"Simplex(dim={self.dim}, scale={self.scale}{extra})"


def dykstra(sets, x, tol=1e-14, max_cycles=20_000):
    """Euclidean projection onto an intersection by Dykstra's algorithm.

    Stops when a full cycle changes neither the iterate nor any of the
    correction increments; the iterate alone can stall while the
    increments are still moving.
    """
    y = np.array(x, dtype=float)
    incs = [np.zeros_like(y) for _ in sets]
    for _ in range(max_cycles):
        moved = 0.0
        for i, s in enumerate(sets):
            v = y + incs[i]
            z = s.euclidean_project(v)
            new_inc = v - z
            moved += np.abs(new_inc - incs[i]).sum() + np.abs(z - y).sum()
            incs[i] = new_inc
            y = z
        if moved <= tol * (1.0 + np.abs(y).sum()):
            if all(s.contains(y, 1e-12) for s in sets):
                return y
    raise ConvergenceError(f"Dykstra did not converge in {max_cycles} cycles")


class Intersection(ConvexSet):
    """Finite intersection of convex sets.

    Construction needs a point of the intersection: pass ``witness`` or
    let alternating projections from the origin find one.
    """

    def __init__(self, members, witness=None):
        members = list(members)
        if not members:
            raise ArgumentError("intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise ArgumentError("members have different dimensions")
        self.members = members
        self.dim = dims.pop()
        self.bounded = any(m.bounded for m in members)
        if witness is None:
            try:
                witness = dykstra(members, np.zeros(self.dim), tol=1e-13)
            except ConvergenceError:
                witness = None
        if witness is None or not self.contains(as_point(witness), MEMBERSHIP_TOL):
            raise InfeasibleError("could not certify a point in the intersection")
        self._witness = np.array(witness, dtype=float)

    def violation(self, x):
        return max(m.violation(x) for m in self.members)

    def violation_rows(self, X):
        return np.max([m.violation_rows(X) for m in self.members], axis=0)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return all(m.contains(x, tol) for m in self.members)

    def euclidean_project(self, x):
        if self.contains(x, 0.0):
            return np.array(x, dtype=float)
        return dykstra(self.members, x)

    def witness(self):
        return self._witness.copy()

    def vertices(self):
        vs = [v for m in self.members for v in m.vertices() if self.contains(v)]
        return np.array(vs).reshape(-1, self.dim)

    def _ray_exits(self, U):
        """Farthest points of the set on the rays from the witness along the rows of ``U``."""
        w = self._witness
        lo = np.zeros(len(U))
        hi = np.full(len(U), 4.0 * PROBE_RADIUS)
        inside = self.violation_rows(w + hi[:, None] * U) <= 1e-12
        lo[inside] = hi[inside]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            ok = self.violation_rows(w + mid[:, None] * U) <= 1e-12
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        return w + lo[:, None] * U

    def _boundary(self, rng, n):
        return self._ray_exits(rng.unit_vectors(n, self.dim).reshape(n, self.dim))

    def _sample(self, rng, n):
        return self._interiorize(rng, self._boundary(rng, n))

    def to_dict(self):
        return {"type": "intersection", "members": [m.to_dict() for m in self.members],
                "witness": self._witness.tolist()}

    def __repr__(self):
        return f"Intersection({self.members!r})"


def set_from_dict(spec):
    kind = spec.get("type")
    if kind == "halfspace":
        return Halfspace(spec["a"], spec["b"])
    if kind == "hyperplane":
        return Hyperplane(spec["a"], spec["b"])
    if kind == "box":
        return Box(spec["lo"], spec["hi"])
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "simplex":
        return Simplex(spec["dim"], spec.get("scale", 1.0), spec.get("support"), spec.get("lower"))
    if kind == "intersection":
        return Intersection([set_from_dict(m) for m in spec["members"]], spec.get("witness"))
    raise ArgumentError(f"unknown set type {kind!r}")
