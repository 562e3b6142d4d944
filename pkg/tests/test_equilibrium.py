import numpy as np
import pytest
from scipy.optimize import minimize

from bregman_ep.equilibrium import (LinearMonotone, LinearPiece, MaxCoordinate, ProximalConvex,
                                    WeightedL1, ZeroPiece, bifunction_from_dict, check_axioms,
                                    ep_residual, firmly_nonexpansive_gap, resolve,
                                    resolvent_inequality_gap, resolvent_residual)
from bregman_ep.errors import ArgumentError
from bregman_ep.legendre import NegativeEntropy, PNorm, SquaredNorm
from bregman_ep.sets import Ball, Box, Halfspace, Simplex

from conftest import make_kinds


def monotone_matrix(rng, d, skew=1.0):
    M = rng.normal((d, d))
    S = rng.normal((d, d))
    return M @ M.T / d + 0.1 * np.eye(d) + skew * (S - S.T) / 2


def test_linear_example():
    g = LinearMonotone(np.eye(2), None, Box.cube(2, 10.0))
    np.testing.assert_allclose(resolve(SquaredNorm(), g, [2.0, 2.0]), [1.0, 1.0], atol=1e-12)


def test_soft_threshold_example():
    g = ProximalConvex(WeightedL1([1.0, 1.0]), Box.cube(2, 100.0))
    np.testing.assert_allclose(resolve(SquaredNorm(), g, [2.0, 0.3]), [1.0, 0.0], atol=1e-12)


def test_equilibrium_points_are_fixed(rng):
    C = Box.cube(3, 2.0)
    A = monotone_matrix(rng, 3)
    z = np.array([0.3, -0.2, 0.5])
    g = LinearMonotone(A, -A @ z, C)  # A z + c = 0 at an interior z
    for f in make_kinds(3)[:4]:
        np.testing.assert_allclose(resolve(f, g, z), z, atol=1e-7)
    g0 = ProximalConvex(ZeroPiece(), C)
    np.testing.assert_allclose(resolve(SquaredNorm(), g0, z), z, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_euclidean_linear_closed_form(d, rng):
    C = Box.cube(d, 50.0)
    for _ in range(50):
        A = monotone_matrix(rng, d)
        c = rng.normal(d)
        x = rng.uniform(d, -3, 3)
        z = resolve(SquaredNorm(), LinearMonotone(A, c, C), x)
        np.testing.assert_allclose(z, np.linalg.solve(np.eye(d) + A, x - c), atol=1e-8)


def qp_oracle(P, q, lo, hi, x0):
    """``argmin z^T P z / 2 + q^T z`` on a box, by L-BFGS-B."""
    res = minimize(lambda z: 0.5 * z @ P @ z + q @ z, x0, jac=lambda z: P @ z + q,
                   bounds=list(zip(lo, hi)), method="L-BFGS-B",
                   options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 10000})
    return res.x


def test_constrained_symmetric_linear_matches_qp(rng):
    # With symmetric A the resolvent VI is the optimality condition of a QP.
    d = 3
    C = Box(-np.ones(d), np.ones(d))
    for _ in range(20):
        A = monotone_matrix(rng, d, skew=0.0)
        c = rng.normal(d)
        x = rng.uniform(d, -6, 6)
        z = resolve(SquaredNorm(), LinearMonotone(A, c, C), x)
        ref = qp_oracle(np.eye(d) + A, c - x, C.lo, C.hi, np.zeros(d))
        np.testing.assert_allclose(z, ref, atol=1e-6)


def test_constrained_nonsymmetric_linear_certificate(rng):
    d = 3
    for C in (Box(-np.ones(d), np.ones(d)), Ball(np.zeros(d), 1.0), Halfspace(np.ones(d), 0.5)):
        probes = C.probe_points(100, 100, seed=4)
        for f in make_kinds(d)[:4]:
            A = monotone_matrix(rng, d)
            g = LinearMonotone(A, rng.normal(d), C)
            x = rng.uniform(d, -4, 4)
            z = resolve(f, g, x)
            assert C.contains(z, 1e-8)
            assert resolvent_residual(f, g, x, z, probes) <= 1e-7


def test_weighted_l1_box_closed_form(rng):
    d = 4
    lo, hi = -np.ones(d), 2 * np.ones(d)
    C = Box(lo, hi)
    for _ in range(50):
        w = rng.uniform(d, 0.0, 2.0)
        x = rng.uniform(d, -5, 5)
        z = resolve(SquaredNorm(), ProximalConvex(WeightedL1(w), C), x)
        soft = np.sign(x) * np.maximum(np.abs(x) - w, 0.0)
        np.testing.assert_allclose(z, np.clip(soft, lo, hi), atol=1e-12)


def test_max_coordinate_matches_epigraph_oracle(rng):
    # min_z s * max(z) + ||z - x||^2 / 2 over a box, as a smooth problem in (z, t).
    d = 3
    C = Box(-np.ones(d), np.ones(d))
    for _ in range(10):
        s = rng.uniform(low=0.5, high=3.0)
        x = rng.uniform(d, -3, 3)
        z = resolve(SquaredNorm(), ProximalConvex(MaxCoordinate(s), C), x)
        obj = lambda v: s * v[-1] + 0.5 * np.sum((v[:-1] - x) ** 2)
        cons = [{"type": "ineq", "fun": lambda v, i=i: v[-1] - v[i]} for i in range(d)]
        v0 = np.append(np.clip(x, -1, 1), 1.0)
        res = minimize(obj, v0, constraints=cons, bounds=[(-1, 1)] * d + [(None, None)],
                       method="SLSQP", options={"ftol": 1e-14, "maxiter": 1000})
        np.testing.assert_allclose(z, res.x[:-1], atol=1e-6)


def test_entropy_linear_piece_on_simplex():
    # KKT: z is proportional to x * exp(-c) on the simplex.
    c = np.array([0.0, 0.5, 2.0])
    x = np.array([0.2, 0.3, 0.5])
    z = resolve(NegativeEntropy(), ProximalConvex(LinearPiece(c), Simplex(3)), x)
    ref = x * np.exp(-c)
    np.testing.assert_allclose(z, ref / ref.sum(), rtol=1e-12)


def test_proximal_pieces_certified_for_all_kinds(rng):
    d = 3
    pieces = [ZeroPiece(), LinearPiece([0.5, -1.0, 0.2]), WeightedL1([0.3, 1.0, 0.0]), MaxCoordinate(1.5)]
    for f in make_kinds(d):
        C = Box(np.full(d, 0.1), np.full(d, 2.0)) if isinstance(f, NegativeEntropy) else Box.cube(d, 2.0)
        probes = C.probe_points(100, 100, seed=5)
        for h in pieces:
            g = ProximalConvex(h, C)
            for x in (rng.uniform((3, d), 0.05, 3) if isinstance(f, NegativeEntropy) else rng.uniform((3, d), -3, 3)):
                z = resolve(f, g, x)
                assert C.contains(z, 1e-8)
                assert resolvent_residual(f, g, x, z, probes) <= 1e-7


def test_single_valuedness(rng):
    d = 3
    C = Box.cube(d, 1.0)
    for f in make_kinds(d)[:4]:
        for g in (LinearMonotone(monotone_matrix(rng, d), rng.normal(d), C),
                  ProximalConvex(MaxCoordinate(1.0), C)):
            x = rng.uniform(d, -3, 3)
            z1 = resolve(f, g, x)
            z2 = resolve(f, g, x + 1e-6 * rng.unit_vectors(1, d)[0])
            assert np.linalg.norm(z1 - z2) <= 1e-5


def test_firmly_nonexpansive_closed_form(rng):
    d = 3
    C = Box.cube(d, 100.0)
    A = monotone_matrix(rng, d)
    g = LinearMonotone(A, None, C)
    T = np.linalg.inv(np.eye(d) + A)
    for _ in range(20):
        x, y = rng.uniform((2, d), -3, 3)
        Tx, Ty = T @ x, T @ y
        exact = ((x - y) - (Tx - Ty)) @ (Tx - Ty)
        assert firmly_nonexpansive_gap(SquaredNorm(), g, x, y) == pytest.approx(exact, abs=1e-9)
    assert firmly_nonexpansive_gap(SquaredNorm(), g, x, x) == 0.0


def test_resolvent_inequality(rng):
    C = Box.cube(2, 10.0)
    g = LinearMonotone(np.eye(2), None, C)
    q = np.zeros(2)
    assert resolvent_inequality_gap(SquaredNorm(), g, q, q) == pytest.approx(0.0, abs=1e-14)
    for x in rng.uniform((20, 2), -5, 5):
        assert resolvent_inequality_gap(SquaredNorm(), g, x, q) >= -1e-7
    with pytest.raises(ArgumentError):
        resolvent_inequality_gap(SquaredNorm(), g, np.ones(2), np.ones(2))


def test_ep_residual():
    C = Box.cube(2, 1.0)
    g = LinearMonotone(np.eye(2), None, C)
    assert ep_residual(g, np.zeros(2)) <= 1e-8
    r = [ep_residual(g, np.array([d, 0.0])) for d in (1e-3, 2e-3, 4e-3)]
    # first order in the perturbation: residual ~ delta * (1 + delta)
    assert r[1] / r[0] == pytest.approx(2.0, rel=0.01)
    assert r[2] / r[1] == pytest.approx(2.0, rel=0.01)
    assert ep_residual(ProximalConvex(ZeroPiece(), C), np.array([0.7, -0.2])) == 0.0
    with pytest.raises(ArgumentError):
        ep_residual(g, np.array([2.0, 0.0]))


def test_returned_fixed_points_are_equilibria():
    C = Box.cube(2, 1.0)
    g = ProximalConvex(WeightedL1([1.0, 1.0]), C)
    z = np.zeros(2)
    for _ in range(60):
        z_next = resolve(SquaredNorm(), g, z + 0.3)
        if np.linalg.norm(z_next - z) < 1e-12:
            break
        z = z_next
    np.testing.assert_allclose(resolve(SquaredNorm(), g, z), z, atol=1e-7)
    assert ep_residual(g, z) <= 1e-7


def test_check_axioms(rng):
    C = Box.cube(2, 1.0)
    good = LinearMonotone(monotone_matrix(rng, 2), rng.normal(2), C)
    assert check_axioms(good).passed
    bad = check_axioms(LinearMonotone(-np.eye(2), None, C))
    assert not bad.passed
    a2 = bad["A2"]
    assert not a2.passed
    x, y = np.array(a2.witness["x"]), np.array(a2.witness["y"])
    assert a2.worst == pytest.approx(np.sum((x - y) ** 2), rel=1e-12)
    rep = check_axioms(ProximalConvex(MaxCoordinate(2.0), C))
    assert rep.passed and rep["A2"].worst == 0.0


@pytest.mark.parametrize("g", [
    LinearMonotone([[1.0, 0.5], [-0.5, 1.0]], [0.1, 0.2], Box.cube(2, 1.0)),
    ProximalConvex(WeightedL1([1.0, 0.5]), Ball([0.0, 0.0], 2.0)),
    ProximalConvex(MaxCoordinate(0.5), Simplex(2)),
    ProximalConvex(LinearPiece([1.0, -1.0]), Halfspace([1.0, 1.0], 1.0)),
])
def test_dict_roundtrip(g):
    h = bifunction_from_dict(g.to_dict())
    x, Y = np.array([0.2, 0.4]), np.array([[0.1, -0.3], [0.5, 0.5]])
    np.testing.assert_array_equal(h.value(x, Y), g.value(x, Y))
    assert h.to_dict() == g.to_dict()


def test_pnorm_resolvent_linear_interior_newton(rng):
    # Interior solution of A z + c + grad f(z) - grad f(x) = 0 for a non-quadratic f.
    f = PNorm(3.0)
    A = monotone_matrix(rng, 2)
    c = np.array([0.1, -0.2])
    x = np.array([0.5, 0.4])
    z = resolve(f, LinearMonotone(A, c, Box.cube(2, 10.0)), x)
    np.testing.assert_allclose(A @ z + c + f.grad(z) - f.grad(x), 0.0, atol=1e-10)
