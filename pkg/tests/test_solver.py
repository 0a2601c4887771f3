import numpy as np
import pytest

from lpmink.convex import Polytope, box, regular_polygon
from lpmink.errors import DomainError, ProblemError, SchemaError, UnsupportedExponentError
from lpmink.invariants import random_problem
from lpmink.solver import (UNSUPPORTED, LpProblem, area_jacobian, cells, facet_areas,
                           oracle_small, positively_spanning, residual, solve)


def _box_problem(p, widths=(1.0, 2.0, 0.5)):
    B = box(widths)
    return B, LpProblem(B.normals, B.h ** (1 - p) * B.facet_areas(), p)


def test_problem_validation():
    u = np.eye(2)
    with pytest.raises(ProblemError):
        LpProblem(u, [1, 1], 0.0)                     # not positively spanning
    with pytest.raises(UnsupportedExponentError):
        LpProblem(np.vstack([u, -u]), np.ones(4), 1.0)
    with pytest.raises(ProblemError):
        LpProblem(np.vstack([u, -u]), [1, 1, 1, 0], 0.0)
    with pytest.raises(ProblemError):
        LpProblem(np.vstack([u, -u]), np.ones(3), 0.0)
    with pytest.raises(ProblemError):
        LpProblem(np.vstack([u, -u]), np.ones(4), 0.0, tau1=2.0)


def test_problem_round_trip():
    _, problem = _box_problem(-1.0)
    again = LpProblem.from_dict(problem.to_dict())
    assert np.array_equal(again.targets, problem.targets)
    with pytest.raises(SchemaError):
        LpProblem.from_dict({"dim": 3, "p": 0, "atoms": [{"u": [1, 0], "f": 1}]})
    with pytest.raises(SchemaError):
        LpProblem.from_dict({"dim": 2, "p": "x", "atoms": []})


def test_positive_spanning():
    assert positively_spanning(regular_polygon(5).normals)
    assert not positively_spanning(np.array([[1, 0], [0, 1], [-1, 0.1]]) /
                                   np.linalg.norm([[1, 0], [0, 1], [-1, 0.1]], axis=1)[:, None])


def test_cells_match_polytope(rng):
    P = box([1.0, 0.7, 1.3], center=[0.1, -0.2, 0.05])
    cl = cells(P.normals, P.h)
    assert np.allclose(cl.areas, P.facet_areas(), rtol=1e-12)
    assert cl.volume == pytest.approx(P.volume, rel=1e-12)
    assert np.allclose(facet_areas(P.normals, P.h)[1], P.facet_areas())


def test_area_jacobian_against_differences(rng):
    problem = random_problem(rng, 3, -1.0)
    h = solve(problem).h
    J = area_jacobian(problem.normals, h)
    eps = 1e-6
    for k in range(len(h)):
        dh = np.zeros(len(h))
        dh[k] = eps
        fd = (facet_areas(problem.normals, h + dh)[1] - facet_areas(problem.normals, h - dh)[1]) / (2 * eps)
        assert np.allclose(J[:, k], fd, atol=1e-6)


@pytest.mark.parametrize("p", [-1.0, 0.5, -3.0])
def test_box_recovered(p):
    B, problem = _box_problem(p)
    res = solve(problem)
    assert res.converged and res.max_residual <= 1e-10
    assert np.allclose(res.h, B.h, rtol=1e-8)
    assert np.allclose(oracle_small(problem).h, B.h, rtol=1e-10)


def test_box_log_case_is_not_identifiable():
    # every box with the same volume has the same cone-volume data
    B, problem = _box_problem(0.0)
    res = solve(problem)
    assert res.converged
    assert oracle_small(problem) == UNSUPPORTED
    assert np.allclose(residual(res.polytope, problem), 0, atol=1e-10)
    assert res.polytope.volume == pytest.approx(B.volume, rel=1e-10)


@pytest.mark.parametrize("k", [5, 8, 12])
def test_polygon_recovered(k):
    P = regular_polygon(k, radius=1.0, phase=0.3)
    problem = LpProblem(P.normals, np.full(k, 0.8), -0.5)
    res = solve(problem)
    exact = oracle_small(problem)
    assert res.converged
    assert np.allclose(res.h, exact.h[0], rtol=1e-9)


def test_residual_history_is_monotone():
    _, problem = _box_problem(-1.0)
    res = solve(problem, variational=False)
    hist = np.array(res.history)
    assert res.converged
    assert np.all(np.diff(hist) <= 1e-15)


def test_damping_still_converges():
    _, problem = _box_problem(-1.0)
    res = solve(problem, damping=0.5)
    assert res.converged


def test_iteration_cap_reports_non_convergence():
    _, problem = _box_problem(-1.0, widths=(1.0, 5.0, 0.2))
    res = solve(problem, max_iter=2, variational=False)
    assert not res.converged
    assert res.iterations <= 2
    assert len(res.residuals) == 6


def test_scaling_covariance():
    _, problem = _box_problem(-0.5)
    base = solve(problem)
    scaled = solve(problem.scaled(3.0))
    assert np.allclose(scaled.h, 3.0 ** (1 / 3.5) * base.h, rtol=1e-8)


def test_result_dict_is_json_safe():
    import json
    _, problem = _box_problem(0.5)
    json.dumps(solve(problem).to_dict(), allow_nan=False)


def test_residual_rejects_mismatched_polytope():
    _, problem = _box_problem(0.5)
    with pytest.raises(DomainError):
        residual(regular_polygon(4), problem)


def test_random_instance_three_dimensional(rng):
    problem = random_problem(rng, 3, -1.0)
    res = solve(problem)
    assert res.converged
    P = Polytope.from_halfspaces(problem.normals, res.h)
    assert np.abs(residual(P, problem)).max() <= 1e-9
