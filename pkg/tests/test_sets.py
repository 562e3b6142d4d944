import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bregman_ep.errors import ArgumentError, InfeasibleError
from bregman_ep.legendre import SquaredNorm
from bregman_ep.sets import (Ball, Box, Halfspace, Hyperplane, Intersection, Simplex, dykstra,
                             project_simplex_sorted, set_from_dict)

from oracles import SET_KINDS, euclid_oracle, euclid_simplex, random_set

coords = arrays(np.float64, 3, elements=st.floats(-20, 20))


def test_constructor_validation():
    with pytest.raises(ArgumentError):
        Halfspace([0.0, 0.0], 1.0)
    with pytest.raises(InfeasibleError):
        Box([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ArgumentError):
        Ball([0.0], 0.0)
    with pytest.raises(ArgumentError):
        Simplex(3, -1.0)
    with pytest.raises(InfeasibleError):
        Simplex(2, 1.0, lower=[0.6, 0.6])
    with pytest.raises(InfeasibleError):
        Intersection([Halfspace([1.0], 0.0), Halfspace([-1.0], -1.0)])


def test_membership_tolerance():
    H = Halfspace([1.0, 0.0], 1.0)
    assert H.contains([1.0 + 5e-10, 3.0])
    assert not H.contains([1.0 + 2e-9, 3.0])
    assert H.contains([1.0 + 2e-9, 3.0], tol=1e-8)


@pytest.mark.parametrize("kind", SET_KINDS)
def test_witness_and_probes_are_members(kind, rng):
    for _ in range(5):
        C = random_set(kind, SquaredNorm(), rng, 3)
        assert C.contains(C.witness())
        P = C.probe_points(20, 20, seed=3)
        assert all(C.contains(p, 1e-8) for p in P)
        np.testing.assert_array_equal(P, C.probe_points(20, 20, seed=3))


@pytest.mark.parametrize("kind", ["halfspace", "hyperplane", "box", "ball", "simplex"])
def test_euclidean_projection_matches_closed_form(kind, rng):
    for _ in range(50):
        C = random_set(kind, SquaredNorm(), rng, 4)
        x = rng.uniform(4, -5, 5)
        np.testing.assert_allclose(C.euclidean_project(x), euclid_oracle(C, x), atol=1e-9)


@given(coords, st.floats(0.1, 10))
def test_sorted_simplex_matches_bisection(x, s):
    np.testing.assert_allclose(project_simplex_sorted(x, s), euclid_simplex(s, x), atol=1e-9)


def test_simplex_with_floor_and_face():
    S = Simplex(3, 1.0, lower=[0.1, 0.1, 0.1])
    assert S.contains([0.8, 0.1, 0.1])
    assert not S.contains([0.9, 0.1, 0.0])
    y = S.euclidean_project(np.array([2.0, 0.0, 0.0]))
    np.testing.assert_allclose(y, [0.8, 0.1, 0.1])
    face = Simplex(3, 1.0, support=[True, True, False], lower=[0.1, 0.1, 0.1])
    assert face.contains([0.5, 0.4, 0.1]) and not face.contains([0.4, 0.4, 0.2])
    np.testing.assert_allclose(face.witness(), [0.45, 0.45, 0.1])
    np.testing.assert_allclose(face.vertices(), [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1]])


def test_box_vertices():
    V = Box([0.0, -1.0], [1.0, 1.0]).vertices()
    assert {tuple(v) for v in V} == {(0, -1), (1, -1), (0, 1), (1, 1)}


def test_dykstra_finds_intersection_projection():
    # Ball of radius 1 at origin with x_1 >= 0.6: projection of (2, 2) is known.
    B, H = Ball([0.0, 0.0], 1.0), Halfspace([-1.0, 0.0], -0.6)
    x = np.array([-1.0, 2.0])
    y = dykstra([B, H], x)
    np.testing.assert_allclose(y, [0.6, 0.8], atol=1e-9)


def test_intersection_witness_and_projection(rng):
    C = Intersection([Ball([0.0, 0.0], 1.0), Halfspace([-1.0, 0.0], -0.6)])
    assert C.contains(C.witness())
    y = C.euclidean_project(np.array([-1.0, 2.0]))
    np.testing.assert_allclose(y, [0.6, 0.8], atol=1e-9)


@pytest.mark.parametrize("kind", SET_KINDS)
def test_dict_roundtrip(kind, rng):
    C = random_set(kind, SquaredNorm(), rng, 3)
    D = set_from_dict(C.to_dict())
    x = rng.uniform(3, -3, 3)
    np.testing.assert_allclose(D.euclidean_project(x), C.euclidean_project(x), atol=1e-12)
    assert D.to_dict() == C.to_dict()
