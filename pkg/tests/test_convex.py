import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpmink.convex import (DiscreteMeasure, Polytope, box, face, lp_area_measure, normal_cone,
                           regular_polygon, support, surface_area_measure)
from lpmink.errors import DomainError, SchemaError
from lpmink.invariants import random_polytope


def test_cube_facets(unit_cube):
    assert unit_cube.n_facets == 6
    assert np.allclose(unit_cube.facet_areas(), 4.0)
    assert unit_cube.volume == pytest.approx(8.0)
    assert np.allclose(unit_cube.h, 1.0)


def test_hexagon_perimeter(hexagon):
    assert hexagon.n_facets == 6
    assert hexagon.facet_areas().sum() == pytest.approx(6.0)
    assert np.allclose(hexagon.h, np.sqrt(3) / 2)


def test_halfspace_and_vertex_forms_agree():
    P = box([1.0, 2.0, 0.5])
    Q = Polytope.from_halfspaces(P.normals, P.h)
    assert Q.volume == pytest.approx(P.volume, rel=1e-12)
    for u, h in zip(P.normals, P.h):
        assert Q.h[Q.facet_index(u)] == pytest.approx(h)


def test_redundant_halfspace_is_dropped():
    u = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1] / np.sqrt(2)])
    P = Polytope.from_halfspaces(u, [1, 1, 1, 1, 5])
    assert P.n_facets == 4
    assert P.facet_index(u[4]) is None


def test_unbounded_and_empty_halfspaces_raise():
    with pytest.raises(DomainError):
        Polytope.from_halfspaces([[1, 0], [0, 1], [-1, 0]], [1, 1, 1])
    with pytest.raises(DomainError):
        Polytope.from_halfspaces([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, -2, 1, 1])


def test_degenerate_points_raise():
    with pytest.raises(DomainError):
        Polytope.from_vertices([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])


def test_support_and_face(unit_cube):
    u = np.array([1.0, 1.0, 0.0])
    assert support(unit_cube, u) == pytest.approx(2.0)
    assert len(face(unit_cube, u)) == 2                    # an edge
    assert len(face(unit_cube, [0, 0, 1])) == 4            # a facet
    assert len(face(unit_cube, [1, 2, 3])) == 1            # a vertex
    stack = support(unit_cube, np.eye(3))
    assert np.allclose(stack, 1.0)


def test_normal_cone_dimensions(unit_cube):
    assert normal_cone(unit_cube, np.zeros(3)).dim == 0
    assert normal_cone(unit_cube, [1, 0, 0]).dim == 1
    assert normal_cone(unit_cube, [1, 1, 0]).dim == 2
    cone = normal_cone(unit_cube, [1, 1, 1])
    assert cone.dim == 3
    assert cone.contains([1, 2, 3]) and not cone.contains([-1, 2, 3])
    with pytest.raises(DomainError):
        normal_cone(unit_cube, [2, 0, 0])


def test_lp_measure_zero_on_facets_through_origin():
    P = box([1, 1, 1], center=[1, 0, 0])
    S = lp_area_measure(P, 0.5)
    assert S.weight_at([-1, 0, 0]) == 0.0
    assert S.weight_at([1, 0, 0]) == pytest.approx(2 ** 0.5 * 4)


def test_discrete_measure_validation():
    with pytest.raises(DomainError):
        DiscreteMeasure([[1, 0], [1, 0]], [1, 1])
    with pytest.raises(DomainError):
        DiscreteMeasure([[1, 0]], [-1])
    with pytest.raises(DomainError):
        DiscreteMeasure([[2, 0]], [1])
    m = DiscreteMeasure([[1, 0], [0, 1]], [2, 3])
    assert m.mass(lambda u: u[0] > 0.5) == 2.0
    assert DiscreteMeasure.from_dict(m.to_dict()).total == 5.0


def test_polytope_dict_round_trip():
    P = regular_polygon(7, radius=1.3, phase=0.2)
    Q = Polytope.from_dict(P.to_dict())
    assert np.array_equal(Q.vertices, P.vertices)
    assert Q.facet_vertices == P.facet_vertices


def test_polytope_schema_errors():
    with pytest.raises(SchemaError):
        Polytope.from_dict({"dim": 4, "vertices": [[0, 0, 0, 0]]})
    with pytest.raises(SchemaError):
        Polytope.from_dict({"dim": 2, "vertices": [[0, 0], [1, "x"]]})
    bad = box([1, 1, 1]).to_dict()
    bad["facets"][0]["h"] = 3.0
    with pytest.raises(SchemaError):
        Polytope.from_dict(bad)


@given(st.integers(0, 10 ** 6))
def test_minkowski_relation_random(seed):
    P = random_polytope(np.random.default_rng(seed))
    S = surface_area_measure(P)
    assert np.abs(S.weights @ S.normals).max() <= 1e-10 * S.total


@given(st.integers(0, 10 ** 6), st.floats(0.1, 10.0))
def test_support_is_homogeneous(seed, lam):
    rng = np.random.default_rng(seed)
    P = random_polytope(rng)
    u = rng.normal(size=P.dim)
    assert support(P, lam * u) == pytest.approx(lam * support(P, u), rel=1e-12)


@given(st.integers(0, 10 ** 6))
def test_support_is_subadditive(seed):
    rng = np.random.default_rng(seed)
    P = random_polytope(rng)
    u, w = rng.normal(size=(2, P.dim))
    assert support(P, u + w) <= support(P, u) + support(P, w) + 1e-12 * P.diameter
