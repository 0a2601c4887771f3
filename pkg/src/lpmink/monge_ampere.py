"""Monge-Ampere measures of piecewise-linear convex functions.

A :class:`PLConvexFunction` is ``v(x) = max_j <a_j, x> + b_j`` on a bounded
convex domain in R^1 or R^2.  Its Monge-Ampere measure is purely atomic:
the atoms sit at the vertices of the linearity subdivision and carry the
d-volume of the convex hull of the gradients active there.

The module also holds the sphere-to-hyperplane transfer used to turn an
L_p Minkowski equation on S^{n-1} into a Euclidean one on a tangent plane.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import DomainError, SchemaError, UnsupportedExponentError

ACTIVE_TOL = 1e-9


def _hull_volume(points):
    """d-volume of conv(points) for points in R^1 or R^2 (0 if degenerate)."""
    points = np.asarray(points, dtype=float)
    if points.shape[1] == 1:
        return float(np.ptp(points[:, 0]))
    if len(points) < 3:
        return 0.0
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        return 0.0


def _hull_vertices(points):
    points = np.asarray(points, dtype=float)
    if points.shape[1] == 1:
        return np.array([[points[:, 0].min()], [points[:, 0].max()]])
    if len(points) < 3:
        return np.unique(points, axis=0)
    try:
        return points[ConvexHull(points).vertices]
    except QhullError:
        # collinear: keep the two extreme points along the spread direction
        c = points - points.mean(axis=0)
        _, _, vt = np.linalg.svd(c)
        t = c @ vt[0]
        return points[[int(np.argmin(t)), int(np.argmax(t))]]


def _domain_halfspaces(domain):
    """(normals, offsets) of a convex polygon or interval."""
    if domain.shape[1] == 1:
        lo, hi = float(domain[:, 0].min()), float(domain[:, 0].max())
        return np.array([[-1.0], [1.0]]), np.array([-lo, hi])
    normals, offs = [], []
    m = len(domain)
    for k in range(m):
        p, q = domain[k], domain[(k + 1) % m]
        t = q - p
        u = np.array([t[1], -t[0]]) / np.linalg.norm(t)
        normals.append(u)
        offs.append(float(u @ p))
    return np.array(normals), np.array(offs)


def _as_domain(domain):
    dom = np.asarray(domain, dtype=float)
    if dom.ndim == 1:
        dom = dom.reshape(-1, 1)
    if dom.shape[1] == 1:
        if len(dom) != 2 or dom[0, 0] == dom[1, 0]:
            raise DomainError("interval domain needs two distinct endpoints")
        return np.sort(dom, axis=0)
    if dom.shape[1] != 2 or len(dom) < 3:
        raise DomainError("polygon domain needs at least 3 vertices in R^2")
    try:
        hull = ConvexHull(dom)
    except QhullError:
        raise DomainError("domain has empty interior") from None
    if len(hull.vertices) != len(dom):
        raise DomainError("domain polygon must be convex with no repeated vertices")
    return dom[hull.vertices]  # counter-clockwise


@dataclass(frozen=True, eq=False)
class PLConvexFunction:
    """``v(x) = max_j (<a_j, x> + b_j)`` on a bounded convex domain.

    ``domain`` is an interval ``[[lo], [hi]]`` (d = 1) or a convex polygon
    (d = 2).  With ``prune=True`` duplicate pieces and pieces that are
    nowhere maximal on the domain are discarded.
    """

    domain: np.ndarray
    gradients: np.ndarray
    offsets: np.ndarray
    prune: bool = field(default=True, repr=False)

    def __post_init__(self):
        dom = _as_domain(self.domain)
        a = np.asarray(self.gradients, dtype=float)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if a.shape[1] != dom.shape[1]:
            raise DomainError("gradient dimension does not match the domain")
        if len(a) != len(b) or len(a) == 0:
            raise DomainError("need matching, non-empty gradients and offsets")
        object.__setattr__(self, "domain", dom)
        if self.prune:
            a, b = self._prune(dom, a, b)
        for arr in (dom, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "gradients", a)
        object.__setattr__(self, "offsets", b)

    @staticmethod
    def _prune(dom, a, b):
        ab = np.unique(np.column_stack([a, b]), axis=0)
        # equal gradients: only the largest offset can be active
        best = {}
        for row in ab:
            key = tuple(row[:-1])
            if key not in best or row[-1] > best[key]:
                best[key] = row[-1]
        a = np.array([k for k in best])
        b = np.array([best[k] for k in best])
        if len(a) == 1:
            return a, b
        d = a.shape[1]
        # cheap pass: winners on a sample grid are certainly active
        lo, hi = dom.min(axis=0), dom.max(axis=0)
        axes = [np.linspace(lo[k], hi[k], 41) for k in range(d)]
        grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
        dn, do = _domain_halfspaces(dom)
        grid = grid[np.all(grid @ dn.T <= do + 1e-12, axis=1)]
        grid = np.vstack([grid, dom])
        vals = grid @ a.T + b
        active = np.zeros(len(a), dtype=bool)
        active[np.unique(np.argmax(vals, axis=1))] = True
        for j in np.flatnonzero(~active):
            A = np.vstack([a - a[j], dn])
            ub = np.concatenate([b[j] - b, do])
            # maximize slack s: (a_k - a_j).y + s <= b_j - b_k for k != j
            A = np.hstack([A, np.concatenate([np.ones(len(a)), np.zeros(len(dn))])[:, None]])
            A[j, -1] = 0.0
            c = np.zeros(d + 1)
            c[-1] = -1.0
            res = linprog(c, A_ub=A, b_ub=ub, bounds=[(None, None)] * d + [(None, 1.0)],
                          method="highs")
            if res.status == 0 and res.x[-1] > 1e-12:
                active[j] = True
        return a[active], b[active]

    @property
    def dim(self):
        return self.gradients.shape[1]

    @cached_property
    def _halfspaces(self):
        return _domain_halfspaces(self.domain)

    @cached_property
    def lipschitz(self):
        return float(np.linalg.norm(self.gradients, axis=1).max())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.max(x @ self.gradients.T + self.offsets, axis=-1)

    def contains(self, x, tol=1e-9):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        dn, do = self._halfspaces
        scale = 1.0 + float(np.abs(self.domain).max())
        return np.all(x @ dn.T <= do + tol * scale, axis=1)

    def active(self, x):
        x = np.asarray(x, dtype=float)
        vals = self.gradients @ x + self.offsets
        top = vals.max()
        return np.flatnonzero(vals >= top - ACTIVE_TOL * (1.0 + abs(top)))

    # -- subdivision --------------------------------------------------------

    @cached_property
    def subdivision_vertices(self):
        """Points of the domain where the gradient image has positive volume."""
        cand = self._candidate_vertices()
        if len(cand) == 0:
            return np.zeros((0, self.dim))
        cand = cand[self.contains(cand)]
        keep = []
        for x in cand:
            act = self.active(x)
            if len(act) >= self.dim + 1 and _hull_volume(self.gradients[act]) > 0:
                keep.append(x)
        if not keep:
            return np.zeros((0, self.dim))
        keep = np.array(keep)
        scale = 1e-9 * (1.0 + float(np.abs(self.domain).max()))
        drop = set()
        for i, j in sorted(cKDTree(keep).query_pairs(scale)):
            if i not in drop:
                drop.add(j)
        return keep[[k for k in range(len(keep)) if k not in drop]]

    def _candidate_vertices(self):
        a, b = self.gradients, self.offsets
        if self.dim == 1:
            pts = []
            for i, j in itertools.combinations(range(len(a)), 2):
                if a[i, 0] != a[j, 0]:
                    pts.append([(b[j] - b[i]) / (a[i, 0] - a[j, 0])])
            return np.array(pts).reshape(-1, 1)
        if len(a) < 3:
            return np.zeros((0, 2))
        lifted = np.column_stack([a, -b])
        try:
            hull = ConvexHull(lifted)
        except QhullError:
            return self._triple_vertices()
        eq = hull.equations
        low = eq[eq[:, 2] < -1e-12]
        return -low[:, :2] / low[:, 2:3]

    def _triple_vertices(self):
        a, b = self.gradients, self.offsets
        idx = np.array(list(itertools.combinations(range(len(a)), 3)))
        M = np.stack([a[idx[:, 1]] - a[idx[:, 0]], a[idx[:, 2]] - a[idx[:, 0]]], axis=1)
        rhs = np.stack([b[idx[:, 0]] - b[idx[:, 1]], b[idx[:, 0]] - b[idx[:, 2]]], axis=1)
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-14
        y = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        vals = y @ a.T + b
        top = vals.max(axis=1)
        mine = vals[np.arange(len(y)), idx[ok][:, 0]]
        good = mine >= top - ACTIVE_TOL * (1.0 + np.abs(top))
        return y[good]

    @cached_property
    def atoms(self):
        """(points, masses) of the Monge-Ampere measure."""
        pts = self.subdivision_vertices
        masses = np.array([_hull_volume(self.gradients[self.active(x)]) for x in pts])
        return pts, masses

    # -- zero set -----------------------------------------------------------

    def minimum(self):
        """(min over the domain, a minimizer), by linear programming."""
        d = self.dim
        dn, do = self._halfspaces
        A = np.vstack([np.hstack([self.gradients, -np.ones((len(self.gradients), 1))]),
                       np.hstack([dn, np.zeros((len(dn), 1))])])
        ub = np.concatenate([-self.offsets, do])
        c = np.zeros(d + 1)
        c[-1] = 1.0
        res = linprog(c, A_ub=A, b_ub=ub, bounds=[(None, None)] * (d + 1), method="highs")
        return float(res.x[-1]), res.x[:d]

    def zero_set(self, tol=1e-10):
        """Vertices of S = {v = 0} and its affine dimension (-1 if empty).

        Only meaningful when v >= 0 on the domain.
        """
        vmin, _ = self.minimum()
        if vmin > tol:
            return np.zeros((0, self.dim)), -1
        dn, do = self._halfspaces
        A = np.vstack([self.gradients, dn])
        ub = np.concatenate([-self.offsets, do])
        pts = []
        for combo in itertools.combinations(range(len(A)), self.dim):
            M = A[list(combo)]
            if abs(np.linalg.det(M)) < 1e-14:
                continue
            y = np.linalg.solve(M, ub[list(combo)])
            if np.all(A @ y <= ub + tol * (1.0 + np.abs(ub))):
                pts.append(y)
        if not pts:
            _, y = self.minimum()
            return y.reshape(1, -1), 0
        pts = np.unique(np.round(np.array(pts), 12), axis=0)
        verts = _hull_vertices(pts) if len(pts) > 1 else pts
        if len(verts) <= 1:
            return verts, 0
        sv = np.linalg.svd(verts[1:] - verts[0], compute_uv=False)
        return verts, int(np.sum(sv > 1e-9))

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        dom = self.domain[:, 0].tolist() if self.dim == 1 else self.domain.tolist()
        return {"domain": dom,
                "pieces": [{"a": a.tolist(), "b": float(b)}
                           for a, b in zip(self.gradients, self.offsets)]}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise SchemaError("$", "expected an object")
        pieces = data.get("pieces")
        if not isinstance(pieces, list) or not pieces:
            raise SchemaError("pieces", "expected a non-empty list")
        a, b = [], []
        for k, pc in enumerate(pieces):
            if not isinstance(pc, dict) or not isinstance(pc.get("a"), list):
                raise SchemaError(f"pieces[{k}].a", "expected a list of numbers")
            if not isinstance(pc.get("b"), (int, float)):
                raise SchemaError(f"pieces[{k}].b", "expected a number")
            a.append([float(t) for t in pc["a"]])
            b.append(float(pc["b"]))
        try:
            return cls(data.get("domain"), np.array(a), np.array(b))
        except (DomainError, TypeError, ValueError) as exc:
            raise SchemaError("domain", str(exc)) from None


def pl_from_tangents(value, gradient, points, domain):
    """PL minorant built from tangent planes of a convex function at ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    grads = np.array([np.atleast_1d(gradient(x)) for x in pts])
    vals = np.array([value(x) for x in pts])
    return PLConvexFunction(domain, grads, vals - np.einsum("ij,ij->i", grads, pts))


# -- regions ------------------------------------------------------------------


@dataclass(frozen=True)
class Points:
    """Finite set of points."""

    coords: np.ndarray

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        c = np.atleast_2d(np.asarray(self.coords, dtype=float))
        return np.any(np.linalg.norm(x[:, None, :] - c[None], axis=-1) <= tol, axis=1)


@dataclass(frozen=True)
class Polygon:
    """Closed convex polygon (d = 2) or closed interval (d = 1)."""

    vertices: np.ndarray

    def contains(self, x, tol=1e-12):
        dom = _as_domain(self.vertices)
        dn, do = _domain_halfspaces(dom)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all(x @ dn.T <= do + tol, axis=1)


@dataclass(frozen=True)
class Box:
    """Half-open axis-parallel box [lo, hi)."""

    lo: np.ndarray
    hi: np.ndarray

    def contains(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x >= self.lo) & (x < self.hi), axis=1)

    @property
    def corners(self):
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        d = len(lo)
        c = np.array(list(itertools.product(*[(lo[k], hi[k]) for k in range(d)])))
        return c


@dataclass(frozen=True)
class Predicate:
    """Region given by a membership function on point arrays."""

    fn: object

    def contains(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.fn(x), dtype=bool)


def subgradient(v, x):
    """Vertices of the subdifferential conv{a_j : j active at x}."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != v.dim or not v.contains(x)[0]:
        raise DomainError("point outside the domain")
    return _hull_vertices(v.gradients[v.active(x)])


def subgradient_volume(v, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != v.dim or not v.contains(x)[0]:
        raise DomainError("point outside the domain")
    return _hull_volume(v.gradients[v.active(x)])


def ma_measure(v, region):
    """mu_v(region) = d-volume of the union of the subgradients over the region."""
    if isinstance(region, Points):
        pts = np.atleast_2d(np.asarray(region.coords, dtype=float))
        pts = np.unique(pts, axis=0)
        return float(sum(subgradient_volume(v, x) for x in pts))
    if isinstance(region, Polygon):
        verts = np.atleast_2d(np.asarray(region.vertices, dtype=float))
        if verts.shape[1] != v.dim and v.dim == 1:
            verts = verts.reshape(-1, 1)
        if not np.all(v.contains(verts)):
            raise DomainError("region is not contained in the domain")
    elif isinstance(region, Box):
        if not np.all(v.contains(region.corners)):
            raise DomainError("region is not contained in the domain")
    elif not hasattr(region, "contains"):
        raise DomainError("unsupported region type")
    pts, masses = v.atoms
    if len(pts) == 0:
        return 0.0
    return float(masses[region.contains(pts)].sum())


@dataclass
class MAReport:
    """Atomic decomposition of mu_v plus the zero-set descriptor."""

    cells: list
    total_mass: float
    zero_set: np.ndarray
    zero_dim: int


def ma_report(v):
    pts, masses = v.atoms
    cells = [(x, subgradient(v, x), float(m)) for x, m in zip(pts, masses)]
    S, r = v.zero_set() if v.minimum()[0] >= -1e-10 else (np.zeros((0, v.dim)), -1)
    return MAReport(cells, float(masses.sum()), S, r)


# -- Alexandrov check -----------------------------------------------------------


@dataclass
class AlexandrovReport:
    """Per-cell comparison of mu_v with the density integral."""

    cells: list            # Box regions that were compared
    measure: np.ndarray    # mu_v(cell)
    integral: np.ndarray   # int_cell g v^(p-1)
    residuals: np.ndarray
    max_residual: float
    zero_set: np.ndarray
    zero_dim: int
    cond_a: bool           # H^d(S) = 0
    atomic_mass_on_S: float
    total_mass: float
    passed: bool


def _integrate(fn, lo, hi, tol, depth):
    """Adaptive dyadic midpoint rule on a box."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    d = len(lo)
    vol = float(np.prod(hi - lo))
    coarse = float(fn(((lo + hi) / 2)[None, :])[0]) * vol
    mid = (lo + hi) / 2
    subs = [(np.where(bits, mid, lo), np.where(bits, hi, mid))
            for bits in itertools.product([0, 1], repeat=d)]
    centers = np.array([(a + b) / 2 for a, b in subs])
    fine = float(fn(centers).sum()) * vol / len(subs)
    if depth == 0 or abs(fine - coarse) <= tol * abs(fine):
        return fine
    return sum(_integrate(fn, a, b, tol, depth - 1) for a, b in subs)


def grid_cells(lo, hi, h):
    """Uniform grid of half-open boxes of side ~h covering [lo, hi]."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    counts = np.maximum(1, np.round((hi - lo) / h).astype(int))
    axes = [np.linspace(lo[k], hi[k], counts[k] + 1) for k in range(len(lo))]
    cells = []
    for idx in itertools.product(*[range(c) for c in counts]):
        a = np.array([axes[k][i] for k, i in enumerate(idx)])
        b = np.array([axes[k][i + 1] for k, i in enumerate(idx)])
        cells.append(Box(a, b))
    return cells


def check_alexandrov(v, g, p, tol=1e-2, cells=None, mesh=None, max_depth=6):
    """Compare v^(1-p) dmu_v with g dH^d cell by cell.

    ``g`` maps an (N, d) array of points to N density values.  Cells are
    half-open boxes inside the domain; by default a uniform grid of side
    ``mesh`` (one eighth of the domain width if not given).  Cells that
    meet the zero set S are skipped.  The atomic mass that sits on S is
    reported separately.
    """
    if p >= 1:
        raise UnsupportedExponentError(f"p = {p} is not < 1")
    vmin, _ = v.minimum()
    if vmin < -1e-10:
        raise DomainError("v is negative somewhere on the domain")
    S, r = v.zero_set()
    cond_a = r < v.dim
    if cells is None:
        lo, hi = v.domain.min(axis=0), v.domain.max(axis=0)
        step = mesh if mesh is not None else float(np.max(hi - lo)) / 8
        cells = [c for c in grid_cells(lo, hi, step) if np.all(v.contains(c.corners))]
    pts, masses = v.atoms
    on_S = np.abs(v(pts)) <= 1e-10 if len(pts) else np.zeros(0, bool)
    kept, mus, ints = [], [], []
    integrand = lambda y: g(y) * np.maximum(v(y), 1e-300) ** (p - 1)
    for c in cells:
        half = 0.5 * float(np.linalg.norm(np.asarray(c.hi) - np.asarray(c.lo)))
        center = (np.asarray(c.lo) + np.asarray(c.hi)) / 2
        if v(center) <= v.lipschitz * half + 1e-12 and _meets_zero_set(v, c):
            continue
        kept.append(c)
        mus.append(float(masses[c.contains(pts)].sum()) if len(pts) else 0.0)
        ints.append(_integrate(integrand, c.lo, c.hi, tol / 10, max_depth))
    mus, ints = np.array(mus), np.array(ints)
    denom = np.maximum(np.abs(mus), np.abs(ints))
    res = np.where(denom > 0, np.abs(mus - ints) / np.where(denom > 0, denom, 1), 0.0)
    worst = float(res.max()) if len(res) else 0.0
    return AlexandrovReport(
        cells=kept, measure=mus, integral=ints, residuals=res, max_residual=worst,
        zero_set=S, zero_dim=r, cond_a=bool(cond_a),
        atomic_mass_on_S=float(masses[on_S].sum()) if len(pts) else 0.0,
        total_mass=float(masses.sum()) if len(pts) else 0.0,
        passed=bool(cond_a and worst <= tol))


def _meets_zero_set(v, cell):
    d = v.dim
    A = np.vstack([v.gradients, np.eye(d), -np.eye(d)])
    ub = np.concatenate([-v.offsets, np.asarray(cell.hi, float), -np.asarray(cell.lo, float)])
    res = linprog(np.zeros(d), A_ub=A, b_ub=ub + 1e-12, bounds=[(None, None)] * d,
                  method="highs")
    return res.status == 0


# -- transfer to a tangent hyperplane -------------------------------------------


def _check_unit(e):
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise DomainError("e must be a unit vector")
    return e


def tangent_basis(e):
    """Orthonormal basis of e^perp as the rows of an (n-1, n) array."""
    e = _check_unit(e)
    n = len(e)
    q, _ = np.linalg.qr(np.column_stack([e, np.eye(n)]))
    basis = q[:, 1:n].T
    return basis - np.outer(basis @ e, e)


def radial_jacobian(x, n):
    """Jacobian (1 + |x|^2)^(-n/2) of the radial projection e + x -> S^{n-1}."""
    x = np.asarray(x, dtype=float)
    return (1.0 + np.sum(x * x, axis=-1)) ** (-n / 2.0)


def radial_projection(e, y):
    """pi(y) = (e + y) / sqrt(1 + |y|^2) for y in e^perp (ambient coordinates)."""
    e = np.asarray(e, dtype=float)
    y = np.asarray(y, dtype=float)
    return (e + y) / np.sqrt(1.0 + np.sum(y * y, axis=-1, keepdims=True))


def transfer_density(f, p, e, y):
    """Right-hand side of the transferred equation on the plane e^perp.

    ``f`` is a density on the unit sphere (callable on unit vectors),
    ``y`` a point of e^perp in ambient coordinates.
    """
    e = _check_unit(e)
    y = np.asarray(y, dtype=float)
    if y.shape != e.shape:
        raise DomainError("y must have the same dimension as e")
    if abs(float(y @ e)) > 1e-12:
        raise DomainError("y is not orthogonal to e")
    n = len(e)
    r2 = float(y @ y)
    if r2 == 0.0:
        return float(f(e))
    return (1.0 + r2) ** (-(n + p) / 2.0) * float(f(radial_projection(e, y)))


def restrict_support(P, e, domain):
    """v(y) = h_P(e + y) on e^perp, in the coordinates of :func:`tangent_basis`.

    ``domain`` is a bounded interval (n = 2) or polygon (n = 3) in those
    coordinates.
    """
    e = _check_unit(e)
    if len(e) != P.dim:
        raise DomainError("e has the wrong dimension")
    if not P.contains(np.zeros(P.dim)):
        raise DomainError("origin is not in the polytope")
    B = tangent_basis(e)
    Z = P.vertices
    return PLConvexFunction(domain, Z @ B.T, Z @ e)


@dataclass(frozen=True)
class CapRegion:
    """Preimage on e^perp of the spherical cap {u : angle(u, center) <= angle}."""

    e: np.ndarray
    center: np.ndarray
    angle: float

    def contains(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        B = tangent_basis(self.e)
        u = radial_projection(self.e, y @ B)
        c = np.asarray(self.center, float) / np.linalg.norm(self.center)
        return u @ c >= np.cos(self.angle)

    def contains_direction(self, u):
        u = np.asarray(u, dtype=float)
        c = np.asarray(self.center, float) / np.linalg.norm(self.center)
        return (u / np.linalg.norm(u, axis=-1, keepdims=True)) @ c >= np.cos(self.angle)
