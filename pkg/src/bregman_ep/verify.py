"""Seeded sweeps over the identities and inequalities the library relies on.

:func:`verify_suite` returns a JSON-ready report with one entry per sweep:
the worst observed gap, the limit it is compared against, and a witness
for the worst case. Failures are entries in the report, never exceptions.
"""

import math
import time

import numpy as np

from .equilibrium import (AXIOM_LIMITS, LinearMonotone, ProximalConvex, WeightedL1, check_axioms,
                          firmly_nonexpansive_gap, resolvent_inequality_gap)
from .errors import BregmanError
from .geometry import _dist, chain_gap, dual_average, three_point_gap, young_fenchel_gap
from .instances import CATALOG, generate_instance
from .legendre import NegativeEntropy, PNorm, QuadraticForm, SquaredNorm
from .operators import qbne_gap
from .projection import bregman_project, projection_vi_residual, pythagoras_gap
from .rng import make_rng
from .sets import Ball, Box, Halfspace, Hyperplane, Intersection, Simplex
from .solver import SolverConfig, run_main

LIMITS = {
    "three_point_gap": 1e-10,
    "chain_gap": 1e-10,
    "gradient_roundtrip": 1e-9,
    "young_fenchel_gap": 1e-9,
    "jensen_slack": -1e-9,
    "projection_vi_residual": 1e-7,
    "pythagoras_gap": -1e-8,
    "firmly_nonexpansive_gap": -1e-7,
    "resolvent_inequality_gap": -1e-7,
    "qbne_gap": -1e-7,
    "instance_consistency": 1e-7,
    "boundedness": 1e-7,
}


def legendre_zoo(d, seed=0):
    """One instance of every built-in kind in dimension ``d``."""
    rng = make_rng(seed).spawn(101)
    M = rng.normal((d, d))
    return [SquaredNorm(), QuadraticForm(M @ M.T + d * np.eye(d)), PNorm(1.5), PNorm(3.0),
            NegativeEntropy()]


def sample_interior(f, rng, n, d):
    """``n`` points of ``int dom f`` with moderate coordinates."""
    if isinstance(f, NegativeEntropy):
        return rng.uniform((n, d), 0.05, 3.0)
    return rng.uniform((n, d), -3.0, 3.0)


def set_zoo(f, d):
    """Closed convex sets meeting ``int dom f`` used by the projection sweeps."""
    one = np.ones(d)
    if isinstance(f, NegativeEntropy):
        return [Halfspace(one, 1.0), Hyperplane(np.arange(1.0, d + 1.0), 2.0),
                Box(np.full(d, 0.2), np.full(d, 1.5)), Ball(one, 0.8), Simplex(d, 2.0),
                Intersection([Box(np.full(d, 0.1), np.full(d, 2.0)), Halfspace(one, 1.5)])]
    return [Halfspace(one, 1.0), Hyperplane(np.arange(1.0, d + 1.0), 2.0),
            Box(-one, 2 * one), Ball(0.5 * one, 1.5), Simplex(d, 2.0),
            Intersection([Ball(np.zeros(d), 2.0), Halfspace(-one, 0.5)])]


class _Sweep:
    """Running worst case of one check; ``upper`` limits bound from above."""

    def __init__(self, name, limit, upper=True):
        self.name, self.limit, self.upper = name, limit, upper
        self.worst = -math.inf if upper else math.inf
        self.witness = {}
        self.samples = 0
        self.errors = []

    def add(self, value, **witness):
        self.samples += 1
        value = float(value)
        worse = value > self.worst if self.upper else value < self.worst
        if worse or math.isnan(value):
            self.worst = value
            self.witness = {k: np.asarray(v).tolist() if isinstance(v, np.ndarray) else
                            (repr(v) if not isinstance(v, (int, float, str, list)) else v)
                            for k, v in witness.items()}

    def fail(self, err, **witness):
        self.errors.append({"error": f"{type(err).__name__}: {err}", **{k: repr(v) for k, v in witness.items()}})

    def report(self):
        ok = not self.errors and self.samples > 0 and not math.isnan(self.worst) and (
            self.worst <= self.limit if self.upper else self.worst >= self.limit)
        return {"name": self.name, "passed": bool(ok), "worst": self.worst, "limit": self.limit,
                "bound": "upper" if self.upper else "lower", "samples": self.samples,
                "witness": self.witness, "errors": self.errors[:5]}


def _identity_sweeps(seed, n):
    tp = _Sweep("three_point_gap", LIMITS["three_point_gap"])
    ch = _Sweep("chain_gap", LIMITS["chain_gap"])
    rt = _Sweep("gradient_roundtrip", LIMITS["gradient_roundtrip"])
    yf = _Sweep("young_fenchel_gap", LIMITS["young_fenchel_gap"])
    js = _Sweep("jensen_slack", LIMITS["jensen_slack"], upper=False)
    rng = make_rng(seed).spawn(1)
    for d in (1, 2, 5):
        for f in legendre_zoo(d, seed):
            for _ in range(n):
                z, y, x = sample_interior(f, rng, 3, d)
                scale = 1.0 + _dist(f, z, x) + _dist(f, z, y) + _dist(f, y, x)
                tp.add(abs(three_point_gap(f, z, y, x)) / scale, f=f, z=z, y=y, x=x)
                ys = sample_interior(f, rng, 4, d)
                cscale = 1.0 + sum(_dist(f, ys[k - 1], ys[k]) for k in range(1, 4)) + _dist(f, ys[0], ys[-1])
                ch.add(abs(chain_gap(f, list(ys))) / cscale, f=f, ys=ys)
                back = f.grad_conj(f.grad(x))
                rt.add(np.max(np.abs(back - x)) / (1.0 + np.max(np.abs(x))), f=f, x=x)
                yf.add(abs(young_fenchel_gap(f, x, f.grad(x))) / (1.0 + abs(f.value(x))), f=f, x=x)
                k = int(rng.integers(4)) + 2
                w = rng.uniform(k, 0.1, 1.0)
                w /= w.sum()
                pts = sample_interior(f, rng, k, d)
                probe = sample_interior(f, rng, 1, d)[0]
                avg = dual_average(f, w, list(pts))
                rhs = sum(wi * _dist(f, probe, p) for wi, p in zip(w, pts))
                js.add((rhs - _dist(f, probe, avg)) / (1.0 + rhs), f=f, w=w, points=pts, probe=probe)
    return [tp, ch, rt, yf, js]


def _projection_sweeps(seed, n):
    vi = _Sweep("projection_vi_residual", LIMITS["projection_vi_residual"])
    py = _Sweep("pythagoras_gap", LIMITS["pythagoras_gap"], upper=False)
    rng = make_rng(seed).spawn(2)
    d = 3
    for f in legendre_zoo(d, seed):
        for C in set_zoo(f, d):
            probes = C.probe_points(50, 50, seed)
            for x in sample_interior(f, rng, n, d):
                try:
                    P = bregman_project(f, C, x)
                    vi.add(projection_vi_residual(f, C, x, P, probes), f=f, C=C, x=x)
                    y = bregman_project(f, C, sample_interior(f, rng, 1, d)[0])
                    py.add(pythagoras_gap(f, C, x, y), f=f, C=C, x=x)
                except BregmanError as err:
                    vi.fail(err, f=f, C=C, x=x)
    return [vi, py]


def _resolvent_sweeps(seed, n, bifunctions):
    fn = _Sweep("firmly_nonexpansive_gap", LIMITS["firmly_nonexpansive_gap"], upper=False)
    ri = _Sweep("resolvent_inequality_gap", LIMITS["resolvent_inequality_gap"], upper=False)
    rng = make_rng(seed).spawn(3)
    for f, g, q in bifunctions:
        for _ in range(n):
            x, y = sample_interior(f, rng, 2, g.feasible_set.dim)
            try:
                fn.add(firmly_nonexpansive_gap(f, g, x, y), f=f, g=g, x=x, y=y)
                if q is not None:
                    ri.add(resolvent_inequality_gap(f, g, x, q), f=f, g=g, x=x, q=q)
            except BregmanError as err:
                fn.fail(err, f=f, g=g, x=x)
    return [fn, ri]


def _resolvent_zoo(seed):
    """``(f, g, q)`` triples with ``q`` a known equilibrium point (or None)."""
    out = []
    for name in CATALOG:
        P = generate_instance(name, seed=seed)
        for g in P.bifunctions:
            q = P.reference_solution if P.f.in_interior(P.reference_solution) else None
            out.append((P.f, g, q))
    d = 3
    C = Box.cube(d, 2.0)
    out.append((PNorm(3.0), ProximalConvex(WeightedL1(np.ones(d)), C), np.zeros(d)))
    A = np.array([[2.0, 1.0, 0.0], [-1.0, 1.0, 0.5], [0.0, -0.5, 1.0]])
    out.append((SquaredNorm(), LinearMonotone(A, None, C), np.zeros(d)))
    return out


def _instance_sweeps(seed, n):
    cons = _Sweep("instance_consistency", LIMITS["instance_consistency"])
    qb = _Sweep("qbne_gap", LIMITS["qbne_gap"], upper=False)
    bd = _Sweep("boundedness", LIMITS["boundedness"])
    rng = make_rng(seed).spawn(4)
    for name in CATALOG:
        P = generate_instance(name, seed=seed)
        cons.add(P.consistency_residual(), instance=name)
        p = P.reference_solution
        if P.f.in_interior(p):
            for T in P.operators:
                for x in sample_interior(P.f, rng, n, P.dim):
                    qb.add(qbne_gap(T, P.f, p, x), instance=name, T=T, x=x)
        try:
            trace = run_main(P, SolverConfig(max_iters=200, rng_seed=seed, n_probes=16), P.x1)
        except BregmanError as err:
            bd.fail(err, instance=name)
            continue
        anchor_d = _dist(P.f, p, P.C.barycenter() if not P.f.zero_interior else np.zeros(P.dim))
        for rec in trace:
            bd.add(_dist(P.f, p, rec.x_next) - max(anchor_d, rec.dist_to_ref), instance=name, n=rec.n)
    return [cons, qb, bd]


def _axiom_checks(seed, extra):
    named = [(f"{name}/g{j}", g) for name in CATALOG
             for j, g in enumerate(generate_instance(name, seed=seed).bifunctions)]
    named += [(f"extra/g{j}", g) for j, g in enumerate(extra)]
    out = []
    for label, g in named:
        for c in check_axioms(g, n_samples=60, seed=seed).checks:
            out.append({"name": f"axiom_{c.name}[{label}]", "passed": bool(c.passed),
                        "worst": c.worst, "limit": AXIOM_LIMITS[c.name], "bound": "upper",
                        "samples": 60, "witness": c.witness, "errors": []})
    return out


def verify_suite(seed=0, extra_bifunctions=(), n_samples=40):
    """Run every sweep with one seed and return a report.

    Parameters
    ----------
    seed : int
    extra_bifunctions : sequence of Bifunction
        Additional bifunctions whose equilibrium axioms are checked; useful
        for injecting a known violation.
    n_samples : int
        Draws per (kind, dimension) in each sweep.

    Returns
    -------
    dict
        ``{"seed", "passed", "elapsed_s", "checks": [...]}``; each check has
        ``name``, ``passed``, ``worst``, ``limit``, ``samples`` and ``witness``.
    """
    t0 = time.perf_counter()
    sweeps = _identity_sweeps(seed, n_samples)
    sweeps += _projection_sweeps(seed, max(2, n_samples // 4))
    sweeps += _resolvent_sweeps(seed, max(2, n_samples // 4), _resolvent_zoo(seed))
    sweeps += _instance_sweeps(seed, max(2, n_samples // 4))
    checks = [s.report() for s in sweeps] + _axiom_checks(seed, list(extra_bifunctions))
    return {"seed": int(seed), "passed": all(c["passed"] for c in checks),
            "elapsed_s": time.perf_counter() - t0, "checks": checks}
