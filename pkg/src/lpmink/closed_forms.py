"""Closed-form convex solutions of singular Monge-Ampere inequalities.

Two explicit families are evaluated here:

* the rotationally symmetric ``v(x1, x2) = |x2| + |x2|^alpha (1 + beta x1^2)``
  on [-1, 1] x {|x2| <= 1} in R^n, which vanishes on the x1-axis and keeps
  ``v^(1-p) det D^2 v`` bounded above and below (``alpha = (p+n-1)/2``);
* the radial profile ``v(z) = z + (q-1)/q^(n-1+p) z^(n-1+p)`` on R^(n-1),
  the restricted support function of a body whose bottom facet contains
  the origin (``q = (p+n-1)/(p+n-2)``).

Also: the dimension bound on zero sets and the smoothness predicates.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .convex import Polytope
from .errors import DomainError, MeshingError, ParameterError, SingularityError, UnsupportedExponentError


# -- segment-vanishing example -------------------------------------------------


@dataclass(frozen=True)
class Example32Params:
    n: int
    p: float
    beta: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ParameterError("n must be an integer >= 2")
        if not self.p > -self.n + 3:
            raise ParameterError(f"need p > {3 - self.n} for n = {self.n}, got p = {self.p}")
        if not self.beta > 0:
            raise ParameterError("beta must be positive")

    @property
    def alpha(self):
        return (self.p + self.n - 1) / 2

    @property
    def beta_threshold(self):
        """Largest beta keeping the (x1, r) block determinant positive on |x1| <= 1."""
        a = self.alpha
        return (a - 1) / ((1 + a) * 1.0 ** 2)

    def to_dict(self):
        return asdict(self)


def residual_order(n, p):
    """Exponent of r in v^(1-p) det D^2 v near the zero set, computed exactly."""
    n, p = Fraction(n), Fraction(p)
    alpha = (p + n - 1) / 2
    return 2 * alpha - n + 1 - p


def _ex32_factors(alpha, beta, x1, r):
    f = r ** alpha
    f1 = alpha * r ** (alpha - 1)
    f2 = alpha * (alpha - 1) * r ** (alpha - 2)
    g = 1 + beta * x1 ** 2
    g1 = 2 * beta * x1
    g2 = 2 * beta
    return f, f1, f2, g, g1, g2


def ex32_value(params, x1, r):
    x1, r = np.asarray(x1, float), np.asarray(r, float)
    return r + r ** params.alpha * (1 + params.beta * x1 ** 2)


@dataclass
class Ex32Eval:
    value: float
    hessian: np.ndarray   # n x n at the point (x1, 0, ..., 0, r)
    block_det: float
    det: float
    residual: float


def ex32_eval(params, x1, r):
    """Value, Hessian and v^(1-p) det D^2 v at (x1, 0, ..., 0, r)."""
    if r <= 0:
        raise SingularityError("Hessian is singular on the zero set r = 0")
    n, a, b = params.n, params.alpha, params.beta
    f, f1, f2, g, g1, g2 = _ex32_factors(a, b, x1, r)
    tang = 1 / r + f1 / r * g
    H = np.zeros((n, n))
    H[0, 0] = f * g2
    H[0, n - 1] = H[n - 1, 0] = f1 * g1
    H[n - 1, n - 1] = f2 * g
    for i in range(1, n - 1):
        H[i, i] = tang
    block = 2 * a * b * r ** (2 * (a - 1)) * (a - 1 - (1 + a) * b * x1 ** 2)
    det = (f2 * g * f * g2 - (f1 * g1) ** 2) * tang ** (n - 2)
    value = float(ex32_value(params, x1, r))
    return Ex32Eval(value, H, float(block), float(det), float(value ** (1 - params.p) * det))


def ex32_hessian_at(params, x):
    """Hessian at an arbitrary point x = (x1, x2) of R^n with x2 != 0."""
    x = np.asarray(x, float)
    x1, x2 = x[0], x[1:]
    r = float(np.linalg.norm(x2))
    if r == 0:
        raise SingularityError("Hessian is singular on the zero set")
    w = x2 / r
    a, b = params.alpha, params.beta
    f, f1, f2, g, g1, g2 = _ex32_factors(a, b, x1, r)
    tang = (1 + f1 * g) / r
    m = len(x2)
    H = np.empty((m + 1, m + 1))
    H[0, 0] = f * g2
    H[0, 1:] = H[1:, 0] = f1 * g1 * w
    H[1:, 1:] = f2 * g * np.outer(w, w) + tang * (np.eye(m) - np.outer(w, w))
    return H


@dataclass
class Ex32Verification:
    c1: float
    c2: float
    convex: bool
    min_eigenvalue: float
    order: Fraction
    rows: list


def ex32_verify(params, grid=(200, 200), r_min=1e-4, spacing="linear"):
    """Sweep residual and Hessian eigenvalues over [-1, 1] x [r_min, 1].

    Convexity failure is reported through ``convex``, never raised.
    """
    order = residual_order(params.n, params.p)
    assert order == 0
    nx, nr = grid
    x1 = np.linspace(-1.0, 1.0, nx)
    r = np.geomspace(r_min, 1.0, nr) if spacing == "log" else np.linspace(r_min, 1.0, nr)
    X, R = np.meshgrid(x1, r, indexing="ij")
    n, a, b, p = params.n, params.alpha, params.beta, params.p
    f, f1, f2, g, g1, g2 = _ex32_factors(a, b, X, R)
    h11, h1n, hnn = f * g2, f1 * g1, f2 * g
    tang = (1 + f1 * g) / R
    block = h11 * hnn - h1n ** 2
    det = block * tang ** (n - 2)
    value = R + f * g
    resid = value ** (1 - p) * det
    tr = h11 + hnn
    lam_min = tr / 2 - np.sqrt((h11 - hnn) ** 2 / 4 + h1n ** 2)
    if n > 2:
        lam_min = np.minimum(lam_min, tang)
    rows = list(zip(X.ravel(), R.ravel(), value.ravel(), det.ravel(), resid.ravel()))
    return Ex32Verification(float(resid.min()), float(resid.max()), bool(np.all(lam_min > 0)),
                            float(lam_min.min()), order, rows)


# -- facet-through-origin example ------------------------------------------------


@dataclass(frozen=True)
class Example42Params:
    n: int
    p: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ParameterError("n must be an integer >= 2")
        if not (-self.n + 2 < self.p < 1):
            raise ParameterError(f"need {2 - self.n} < p < 1, got p = {self.p}")
        assert self.q > 1

    @property
    def q(self):
        return (self.p + self.n - 1) / (self.p + self.n - 2)

    @property
    def exponent(self):
        return self.n - 1 + self.p

    @property
    def coefficient(self):
        return (self.q - 1) / self.q ** self.exponent

    def to_dict(self):
        return asdict(self)


def ex42_profile(params, r):
    """Height of the lower boundary: (r - 1)^q for r >= 1, else 0."""
    r = np.asarray(r, float)
    return np.where(r >= 1, np.maximum(r - 1, 0.0) ** params.q, 0.0)


def ex42_value(params, z):
    z = np.asarray(z, float)
    if np.any(z < 0):
        raise DomainError("z must be nonnegative")
    return z + params.coefficient * z ** params.exponent


@dataclass
class Ex42Eval:
    value: float
    radial: float        # second derivative along y1 at (z, 0, ..., 0)
    tangential: float    # y_i y_i entries, i != 1
    hessian: np.ndarray  # (n-1) x (n-1)
    det: float
    residual: float


def ex42_eval(params, z):
    """Value, Hessian and v^(1-p) det D^2 v at (z, 0, ..., 0), z > 0."""
    if z <= 0:
        raise SingularityError("derivatives are singular at z = 0")
    n, m, C = params.n, params.exponent, params.coefficient
    radial = C * m * (m - 1) * z ** (m - 2)
    tang = 1 / z + C * m * z ** (m - 2)
    H = np.diag([radial] + [tang] * (n - 2))
    det = radial * tang ** (n - 2)
    value = float(ex42_value(params, z))
    return Ex42Eval(value, float(radial), float(tang), H, float(det),
                    float(value ** (1 - params.p) * det))


def ex42_hessian_at(params, y):
    """Hessian of the radial function at an arbitrary y != 0 in R^(n-1)."""
    y = np.asarray(y, float)
    z = float(np.linalg.norm(y))
    if z == 0:
        raise SingularityError("derivatives are singular at the origin")
    ev = ex42_eval(params, z)
    w = y / z
    d = len(y)
    return ev.radial * np.outer(w, w) + ev.tangential * (np.eye(d) - np.outer(w, w))


def ex42_rhs(params, y):
    """v^(1-p) det D^2 v as a function on R^(n-1) (points as rows)."""
    y = np.atleast_2d(np.asarray(y, float))
    z = np.linalg.norm(y, axis=1)
    n, m, C, p = params.n, params.exponent, params.coefficient, params.p
    with np.errstate(divide="ignore", invalid="ignore"):
        radial = C * m * (m - 1) * z ** (m - 2)
        tang = 1 / z + C * m * z ** (m - 2)
        out = (z + C * z ** m) ** (1 - p) * radial * tang ** (n - 2)
    return out


def ex42_limit(params, zs=(1e-3, 1e-4, 1e-5, 1e-6)):
    """Residuals along zs and a Richardson estimate of their limit as z -> 0+.

    The leading correction is of order z^(n-2+p).
    """
    zs = np.asarray(zs, float)
    res = np.array([ex42_eval(params, z).residual for z in zs])
    s = params.n - 2 + params.p
    lam = (zs[-2] / zs[-1]) ** s
    c = (lam * res[-1] - res[-2]) / (lam - 1)
    return res, float(c)


def ex42_body(params, angles=64, rings=16):
    """Polytope inscribed in the lower part of the body, capped flat at height 1.

    Bottom facet: the regular ``angles``-gon inscribed in the unit circle at
    height 0, so the origin lies in its relative interior.
    """
    if params.n != 3:
        raise ParameterError("explicit bodies are only built for n = 3")
    if angles < 3 or rings < 1:
        raise MeshingError("need at least 3 angles and 1 ring to enclose the origin")
    t = 2 * np.pi * np.arange(angles) / angles
    ring = np.column_stack([np.cos(t), np.sin(t)])
    radii = 1.0 + np.arange(0, rings + 1) / rings
    pts = [np.column_stack([rad * ring, np.full(angles, float(ex42_profile(params, rad)))])
           for rad in radii]
    body = Polytope.from_vertices(np.vstack(pts))
    k = body.facet_index([0.0, 0.0, -1.0])
    if k is None or abs(body.h[k]) > body.tol:
        raise MeshingError("bottom facet through the origin was not produced")
    return body


# -- dimension bounds and predicates ------------------------------------------


def dim_bound(n, r):
    """Smallest p compatible with an r-dimensional zero set in R^n."""
    if not 1 <= r <= n - 1:
        raise DomainError(f"need 1 <= r <= n - 1, got n = {n}, r = {r}")
    return -n + 1 + 2 * r


def admissible(n, r, p):
    return p >= dim_bound(n, r)


def smoothness_predicate(n, p):
    """True when every solution with positive bounded density is smooth."""
    if p >= 1:
        raise UnsupportedExponentError(f"p = {p} is not < 1")
    return n in (2, 3) or p < 4 - n


def nko_bound(n):
    """Strict upper bound on dim N(K, o) for n >= 4 and o on the boundary."""
    return (n + 1) / 2
