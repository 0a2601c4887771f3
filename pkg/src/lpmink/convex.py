"""Polytopal convex bodies in dimensions 2 and 3.

A :class:`Polytope` stores both its vertex list and its facet list
(unit normal, support number, ordered vertex cycle).  The two are
cross-checked on construction.  Everything downstream (surface area
measures, normal cones, faces, L_p area measures) is computed directly
from that dual data.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError, cKDTree
from scipy.spatial.distance import pdist

from .errors import DomainError, SchemaError, UnsupportedExponentError

ANGLE_TOL = 1e-9
REL_TOL = 1e-9
UNIT_TOL = 1e-12


def _as_direction(u, dim):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != dim:
        raise DomainError(f"direction has length {u.shape[-1]}, expected {dim}")
    if np.any(np.linalg.norm(u, axis=-1) == 0.0):
        raise DomainError("zero direction")
    return u


def _affine_rank(points, tol):
    points = np.asarray(points, dtype=float)
    if len(points) <= 1:
        return 0
    sv = np.linalg.svd(points[1:] - points[0], compute_uv=False)
    return int(np.sum(sv > tol))


def _plane_basis(u):
    """Orthonormal basis (e1, e2) of u^perp with (e1, e2, u) right-handed."""
    u = np.asarray(u, dtype=float)
    a = np.zeros(3)
    a[np.argmin(np.abs(u))] = 1.0
    e1 = a - np.dot(a, u) * u
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return e1, e2


def _order_cycle(vertices, ids, u):
    pts = vertices[list(ids)]
    if len(u) == 2:
        t = np.array([-u[1], u[0]])
        order = np.argsort(pts @ t)
        return tuple(int(ids[k]) for k in order)
    e1, e2 = _plane_basis(u)
    c = pts.mean(axis=0)
    ang = np.arctan2((pts - c) @ e2, (pts - c) @ e1)
    order = np.argsort(ang)
    return tuple(int(ids[k]) for k in order)


def _facet_area(vertices, cycle, u):
    pts = vertices[list(cycle)]
    if len(u) == 2:
        return float(np.linalg.norm(pts[1] - pts[0]))
    total = np.zeros(3)
    for k in range(len(pts)):
        total += np.cross(pts[k], pts[(k + 1) % len(pts)])
    return float(abs(0.5 * np.dot(total, u)))


def _dedupe_points(points, tol):
    points = np.asarray(points, dtype=float)
    drop = set()
    for i, j in sorted(cKDTree(points).query_pairs(tol)):
        if i not in drop:
            drop.add(j)
    return points[[k for k in range(len(points)) if k not in drop]]


def _merge_normals(normals, tol=ANGLE_TOL * 10):
    normals = np.asarray(normals, dtype=float)
    label = np.arange(len(normals))
    for i, j in sorted(cKDTree(normals).query_pairs(tol)):
        label[label == label[j]] = label[i]
    merged = np.array([normals[label == k].mean(axis=0) for k in np.unique(label)])
    return merged / np.linalg.norm(merged, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex polytope with nonempty interior in R^2 or R^3.

    ``facet_vertices[i]`` lists the indices of the vertices on facet i,
    ordered counter-clockwise when seen from outside (3D) or along the
    positively rotated normal (2D).
    """

    dim: int
    vertices: np.ndarray
    normals: np.ndarray
    h: np.ndarray
    facet_vertices: tuple
    _volume: float = field(default=0.0, repr=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DomainError(f"dimension {self.dim} not supported")
        for name in ("vertices", "normals", "h"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self._validate()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_vertices(cls, points):
        """Convex hull of a point cloud; non-extreme points are dropped."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise DomainError("points must be an (N, 2) or (N, 3) array")
        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise DomainError(f"degenerate point set: {exc}") from None
        diam = float(np.max(np.ptp(pts, axis=0)))
        cand = _dedupe_points(pts[hull.vertices], REL_TOL * diam)
        normals = _merge_normals(hull.equations[:, :-1])
        return cls._assemble(pts.shape[1], cand, normals)

    @classmethod
    def from_halfspaces(cls, normals, h):
        """Polytope {x : <u_i, x> <= h_i}.

        Normals that do not support a facet are dropped; use
        :meth:`facet_index` to map input normals to surviving facets.
        """
        u = np.asarray(normals, dtype=float)
        h = np.asarray(h, dtype=float)
        n = u.shape[1]
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        center = chebyshev_center(u, h)
        if center is None:
            raise DomainError("halfspace system has empty interior")
        hs = np.hstack([u, -h[:, None]])
        try:
            with np.errstate(divide="ignore", invalid="ignore"):
                inter = HalfspaceIntersection(hs, center)
        except QhullError as exc:
            raise DomainError(f"halfspace intersection failed: {exc}") from None
        pts = inter.intersections
        if not np.all(np.isfinite(pts)):
            raise DomainError("halfspace system is unbounded")
        diam = float(np.max(np.ptp(pts, axis=0)))
        verts = _dedupe_points(pts, REL_TOL * diam)
        return cls._assemble(n, verts, u)

    @classmethod
    def _assemble(cls, n, verts, normals):
        diam = float(np.max(np.ptp(verts, axis=0))) if len(verts) else 0.0
        tol = REL_TOL * max(diam, 1e-300)
        # extreme points: incident facet normals must have full rank
        supp = verts @ normals.T
        hvals = supp.max(axis=0)
        inc = np.abs(supp - hvals) <= tol
        extreme = [np.linalg.matrix_rank(normals[inc[k]], tol=1e-9) == n
                   if inc[k].any() else False for k in range(len(verts))]
        verts = verts[np.array(extreme, dtype=bool)]
        if len(verts) < n + 1:
            raise DomainError("degenerate polytope")
        supp = verts @ normals.T
        hvals = supp.max(axis=0)
        inc = np.abs(supp - hvals) <= tol
        keep_u, keep_h, cycles = [], [], []
        for i, u in enumerate(normals):
            ids = np.flatnonzero(inc[:, i])
            if _affine_rank(verts[ids], tol) != n - 1:
                continue
            keep_u.append(u)
            keep_h.append(hvals[i])
            cycles.append(_order_cycle(verts, ids, u))
        return cls(dim=n, vertices=verts, normals=np.array(keep_u),
                   h=np.array(keep_h), facet_vertices=tuple(cycles))

    # -- validation -------------------------------------------------------

    def _validate(self):
        n = self.dim
        V, U, h = self.vertices, self.normals, self.h
        if V.ndim != 2 or V.shape[1] != n or U.ndim != 2 or U.shape[1] != n:
            raise DomainError("vertex/normal arrays have wrong shape")
        if len(U) != len(h) or len(U) != len(self.facet_vertices):
            raise DomainError("facet arrays have inconsistent lengths")
        if np.any(np.abs(np.linalg.norm(U, axis=1) - 1.0) > UNIT_TOL):
            raise DomainError("facet normals must be unit vectors")
        tol = REL_TOL * self.diameter
        if np.any(V @ U.T > h + tol):
            raise DomainError("a vertex violates a facet inequality")
        for i, cyc in enumerate(self.facet_vertices):
            if np.any(np.abs(V[list(cyc)] @ U[i] - h[i]) > tol):
                raise DomainError(f"facet {i} lists a vertex off its plane")
            if _affine_rank(V[list(cyc)], tol) != n - 1:
                raise DomainError(f"facet {i} is not (n-1)-dimensional")
        try:
            vol = float(ConvexHull(V).volume)
        except QhullError:
            raise DomainError("polytope has empty interior") from None
        if vol <= 0:
            raise DomainError("polytope has empty interior")
        areas = self.facet_areas()
        # round trip: the facet list must close up and reproduce conv(V)
        if np.any(np.abs(areas @ U) > 1e-9 * max(areas.sum(), 1e-300)):
            raise DomainError("facet list does not close (Minkowski relation)")
        vol_h = float(areas @ h) / n
        if abs(vol_h - vol) > 1e-8 * vol:
            raise DomainError("vertex and facet representations disagree")
        object.__setattr__(self, "_volume", vol)

    # -- basic quantities ---------------------------------------------------

    @cached_property
    def diameter(self):
        return float(pdist(self.vertices).max())

    @property
    def tol(self):
        return REL_TOL * self.diameter

    @property
    def volume(self):
        return self._volume

    @property
    def n_facets(self):
        return len(self.normals)

    def facet_areas(self):
        return np.array([_facet_area(self.vertices, c, u)
                         for c, u in zip(self.facet_vertices, self.normals)])

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.normals @ x <= self.h + self.tol))

    def facet_index(self, u, tol=ANGLE_TOL * 10):
        """Index of the facet with outer normal u, or None."""
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        d = np.linalg.norm(self.normals - u, axis=1)
        k = int(np.argmin(d))
        return k if d[k] <= tol else None

    def incident_facets(self, z):
        z = np.asarray(z, dtype=float)
        return np.flatnonzero(np.abs(self.normals @ z - self.h) <= self.tol)

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return {
            "dim": self.dim,
            "vertices": self.vertices.tolist(),
            "facets": [{"normal": u.tolist(), "h": float(s), "vertex_ids": list(c)}
                       for u, s, c in zip(self.normals, self.h, self.facet_vertices)],
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise SchemaError("$", "expected an object")
        dim = data.get("dim")
        if dim not in (2, 3):
            raise SchemaError("dim", "must be 2 or 3")
        verts = _number_matrix(data.get("vertices"), dim, "vertices")
        facets = data.get("facets")
        if facets is None:
            try:
                return cls.from_vertices(verts)
            except DomainError as exc:
                raise SchemaError("vertices", str(exc)) from None
        if not isinstance(facets, list) or not facets:
            raise SchemaError("facets", "expected a non-empty list")
        normals, hs, cycles = [], [], []
        for k, f in enumerate(facets):
            where = f"facets[{k}]"
            if not isinstance(f, dict):
                raise SchemaError(where, "expected an object")
            normals.append(_number_matrix([f.get("normal")], dim, where + ".normal")[0])
            if not isinstance(f.get("h"), (int, float)):
                raise SchemaError(where + ".h", "expected a number")
            hs.append(float(f["h"]))
            ids = f.get("vertex_ids")
            if (not isinstance(ids, list)
                    or not all(isinstance(i, int) and 0 <= i < len(verts) for i in ids)):
                raise SchemaError(where + ".vertex_ids", "expected valid vertex indices")
            cycles.append(tuple(ids))
        try:
            return cls(dim=dim, vertices=verts, normals=np.array(normals),
                       h=np.array(hs), facet_vertices=tuple(cycles))
        except DomainError as exc:
            raise SchemaError("facets", str(exc)) from None


def _number_matrix(rows, dim, where):
    if not isinstance(rows, list) or not rows:
        raise SchemaError(where, "expected a non-empty list")
    for k, r in enumerate(rows):
        if (not isinstance(r, list) or len(r) != dim
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in r)):
            raise SchemaError(f"{where}[{k}]", f"expected {dim} numbers")
    return np.array(rows, dtype=float)


def chebyshev_center(normals, h):
    """Center of the largest ball inside {<u_i,x> <= h_i}; None if empty."""
    u = np.asarray(normals, dtype=float)
    n = u.shape[1]
    norms = np.linalg.norm(u, axis=1)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([u, norms[:, None]]), b_ub=h,
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12 * max(1.0, np.abs(h).max()):
        return None
    return res.x[:n]


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite atomic measure on the unit sphere."""

    normals: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.array(self.normals, dtype=float))
        w = np.array(self.weights, dtype=float).reshape(-1)
        if len(u) != len(w):
            raise DomainError("normals and weights differ in length")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        if np.any(np.abs(np.linalg.norm(u, axis=1) - 1.0) > 1e-9):
            raise DomainError("atoms must sit on unit vectors")
        for i in range(len(u)):
            # chord length; arccos is inaccurate near 1
            if np.any(np.linalg.norm(u[i + 1:] - u[i], axis=1) <= ANGLE_TOL):
                raise DomainError("atom normals must be pairwise distinct")
        u.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "normals", u)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)

    @property
    def total(self):
        return float(self.weights.sum())

    def weight_at(self, u, tol=ANGLE_TOL * 10):
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        d = np.linalg.norm(self.normals - u, axis=1)
        k = int(np.argmin(d))
        return float(self.weights[k]) if d[k] <= tol else 0.0

    def mass(self, predicate):
        """Total weight of atoms whose normal satisfies ``predicate``."""
        mask = np.array([bool(predicate(u)) for u in self.normals], dtype=bool)
        return float(self.weights[mask].sum())

    def to_dict(self):
        return {"atoms": [{"u": u.tolist(), "w": float(w)}
                          for u, w in zip(self.normals, self.weights)]}

    @classmethod
    def from_dict(cls, data):
        atoms = data.get("atoms") if isinstance(data, dict) else None
        if not isinstance(atoms, list) or not atoms:
            raise SchemaError("atoms", "expected a non-empty list")
        dim = len(atoms[0].get("u", [])) if isinstance(atoms[0], dict) else 0
        us = _number_matrix([a.get("u") if isinstance(a, dict) else None for a in atoms],
                            dim, "atoms[].u")
        ws = []
        for k, a in enumerate(atoms):
            if not isinstance(a.get("w"), (int, float)):
                raise SchemaError(f"atoms[{k}].w", "expected a number")
            ws.append(float(a["w"]))
        try:
            return cls(us, np.array(ws))
        except DomainError as exc:
            raise SchemaError("atoms", str(exc)) from None


@dataclass(frozen=True, eq=False)
class Cone:
    """Closed convex cone with apex at the origin, given by extremal rays."""

    generators: np.ndarray
    dim: int

    def contains(self, u, tol=ANGLE_TOL):
        u = np.asarray(u, dtype=float)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return True
        if self.dim == 0:
            return False
        _, resid = nnls(self.generators.T, u / nu)
        return bool(resid <= tol)

    def contains_cone(self, other, tol=ANGLE_TOL):
        return all(self.contains(g, tol) for g in other.generators)


def support(P, u):
    """Support function h_P(u) = max over vertices of <u, z>.

    Accepts a single direction or a stack of directions.
    """
    u = _as_direction(u, P.dim)
    vals = u @ P.vertices.T
    return vals.max(axis=-1) if vals.ndim > 1 else float(vals.max())


def face(P, u):
    """Vertices of the face F(P, u) = {z in P : <z,u> = h_P(u)}."""
    u = _as_direction(u, P.dim)
    vals = P.vertices @ u
    scale = np.linalg.norm(u)
    return P.vertices[vals >= vals.max() - P.tol * scale]


def normal_cone(P, z):
    """Normal cone N(P, z), generated by normals of facets through z."""
    z = np.asarray(z, dtype=float)
    if z.shape != (P.dim,):
        raise DomainError("point has wrong dimension")
    if not P.contains(z):
        raise DomainError("point lies outside the polytope")
    gens = P.normals[P.incident_facets(z)]
    if len(gens) == 0:
        return Cone(np.zeros((0, P.dim)), 0)
    extremal = []
    for k in range(len(gens)):
        others = np.delete(gens, k, axis=0)
        if len(others):
            _, resid = nnls(others.T, gens[k])
            if resid <= ANGLE_TOL:
                continue
        extremal.append(gens[k])
    gens = np.array(extremal)
    return Cone(gens, int(np.linalg.matrix_rank(gens, tol=ANGLE_TOL)))


def surface_area_measure(P):
    """S_P: atom at every facet normal, weighted by the facet (n-1)-volume."""
    areas = P.facet_areas()
    if np.any(areas <= 0):
        raise DomainError("degenerate facet")
    return DiscreteMeasure(P.normals, areas)


def lp_area_measure(P, p):
    """S_{P,p}: weights h_i^{1-p} times facet volume (zero where h_i = 0)."""
    if p >= 1:
        raise UnsupportedExponentError(f"p = {p} is not < 1")
    if not P.contains(np.zeros(P.dim)):
        raise DomainError("origin is not in the polytope")
    h = np.where(np.abs(P.h) <= P.tol, 0.0, P.h)
    return DiscreteMeasure(P.normals, h ** (1.0 - p) * P.facet_areas())


def box(half_widths, center=None):
    """Axis-parallel box with the given half-widths."""
    a = np.asarray(half_widths, dtype=float)
    c = np.zeros_like(a) if center is None else np.asarray(center, dtype=float)
    n = len(a)
    corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
    return Polytope.from_vertices(c + corners * a)


def regular_polygon(k, radius=1.0, phase=0.0):
    """Regular k-gon with vertices on the circle of given radius."""
    t = phase + 2 * np.pi * np.arange(k) / k
    return Polytope.from_vertices(radius * np.column_stack([np.cos(t), np.sin(t)]))
