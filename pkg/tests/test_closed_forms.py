from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpmink.closed_forms import (Example32Params, Example42Params, admissible, dim_bound,
                                 ex32_eval, ex32_hessian_at, ex32_verify, ex42_body, ex42_eval,
                                 ex42_hessian_at, ex42_limit, ex42_rhs, ex42_value, nko_bound,
                                 residual_order, smoothness_predicate)
from lpmink.errors import (DomainError, MeshingError, ParameterError, SingularityError,
                           UnsupportedExponentError)


def test_ex32_params():
    params = Example32Params(3, 0.5, 0.05)
    assert params.alpha == 1.25
    assert params.beta_threshold == pytest.approx(0.25 / 2.25)
    with pytest.raises(ParameterError):
        Example32Params(3, 0.0, 0.05)
    with pytest.raises(ParameterError):
        Example32Params(3, 0.5, 0.0)
    with pytest.raises(ParameterError):
        Example32Params(1, 0.5, 0.1)


def test_ex32_eval_matches_general_hessian():
    params = Example32Params(4, 0.0, 0.05)
    ev = ex32_eval(params, 0.3, 0.6)
    H = ex32_hessian_at(params, np.array([0.3, 0.0, 0.0, 0.6]))
    assert np.allclose(ev.hessian, H)
    assert ev.det == pytest.approx(np.linalg.det(H), rel=1e-10)
    with pytest.raises(SingularityError):
        ex32_eval(params, 0.3, 0.0)


def test_ex32_large_beta_loses_convexity():
    params = Example32Params(3, 0.5, 0.5)
    assert params.beta > params.beta_threshold
    assert not ex32_verify(params, grid=(41, 41)).convex


@given(st.integers(2, 12), st.fractions(min_value=-9, max_value=1))
def test_residual_order_vanishes(n, p):
    if p > 3 - n:
        assert residual_order(n, p) == 0
        assert isinstance(residual_order(n, p), Fraction)


def test_ex42_params():
    params = Example42Params(3, 0.0)
    assert params.q == 2.0 and params.exponent == 2.0
    assert params.coefficient == pytest.approx(0.25)
    for bad in (-1.0, 1.0):
        with pytest.raises(ParameterError):
            Example42Params(3, bad)


def test_ex42_limit_at_p_zero():
    # v(z) = z + z^2 / 4: residual tends to C m (m - 1) = 1/2
    res, c = ex42_limit(Example42Params(3, 0.0))
    assert c == pytest.approx(0.5, rel=1e-9)
    assert np.all(np.diff(res) < 0) or np.all(np.diff(res) > 0)


def test_ex42_value_and_errors():
    params = Example42Params(3, 0.5)
    assert ex42_value(params, 0.0) == 0.0
    with pytest.raises(DomainError):
        ex42_value(params, -1.0)
    with pytest.raises(SingularityError):
        ex42_eval(params, 0.0)
    with pytest.raises(SingularityError):
        ex42_hessian_at(params, [0.0, 0.0])


def test_ex42_rhs_is_rotation_invariant(rng):
    params = Example42Params(3, -0.5)
    y = rng.normal(size=(5, 2))
    z = np.linalg.norm(y, axis=1)
    on_axis = np.column_stack([z, np.zeros(5)])
    assert np.allclose(ex42_rhs(params, y), ex42_rhs(params, on_axis), rtol=1e-12)
    H = ex42_hessian_at(params, y[0])
    assert np.linalg.det(H) == pytest.approx(ex42_eval(params, z[0]).det, rel=1e-10)


def test_ex42_body_has_bottom_facet_through_origin():
    P = ex42_body(Example42Params(3, 0.0), angles=16, rings=4)
    k = P.facet_index([0, 0, -1])
    assert abs(P.h[k]) <= P.tol
    with pytest.raises(ParameterError):
        ex42_body(Example42Params(4, 0.0))
    with pytest.raises(MeshingError):
        ex42_body(Example42Params(3, 0.0), angles=2)


def test_predicates():
    assert dim_bound(5, 2) == 0
    with pytest.raises(DomainError):
        dim_bound(3, 3)
    assert admissible(3, 1, 0.0) and not admissible(4, 1, -1.5)
    assert smoothness_predicate(3, -5.0)
    assert smoothness_predicate(5, -1.5) and not smoothness_predicate(5, -1.0)
    with pytest.raises(UnsupportedExponentError):
        smoothness_predicate(3, 1.0)
    assert nko_bound(5) == 3.0
