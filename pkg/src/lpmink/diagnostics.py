"""Regularity predicates evaluated on concrete polytopes.

The origin's position decides almost everything: its normal cone
N(K, o), the set X0 swept by the faces F(K, u) with u in N(K, o), and the
surface-area mass sitting on those faces.  On a polytope X0 is the union
of the facets through o (empty when o is interior).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .convex import ANGLE_TOL, face, normal_cone
from .errors import DomainError, UnsupportedExponentError


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


# relative threshold below which a surface-area mass counts as zero
MASS_TOL = 1e-12
# residual threshold for the discrete equation h^(1-p) A = f
RESIDUAL_TOL = 1e-8
# interiority margin for the p <= 2 - n check, relative to the diameter
INTERIOR_MARGIN = 1e-6


@dataclass
class RegularityReport:
    origin_location: str                 # "interior" or "boundary"
    origin_face: dict | None             # minimal face containing o, when on the boundary
    dim_nko: int
    cond_a: bool
    cond_b_residuals: np.ndarray | None
    cond_28: bool
    witness_mass: float
    x0_facets: list                      # facet indices of P whose union is X0
    x0_vertices: list                    # vertex indices of P lying in X0
    x0_mass: float
    verdicts: dict = field(default_factory=dict)

    def to_dict(self):
        res = None
        if self.cond_b_residuals is not None:
            res = [None if np.isnan(r) else float(r) for r in self.cond_b_residuals]
        return {
            "origin_location": self.origin_location,
            "origin_face": self.origin_face,
            "dim_nko": self.dim_nko,
            "cond_a": self.cond_a,
            "cond_b_residuals": res,
            "cond_28": self.cond_28,
            "witness_mass": self.witness_mass,
            "x0_facets": list(self.x0_facets),
            "x0_vertices": list(self.x0_vertices),
            "x0_mass": self.x0_mass,
            "verdicts": {k: Verdict(v).value for k, v in self.verdicts.items()},
        }

    def table(self):
        """Plain-text rendering, one field per line."""
        d = self.to_dict()
        rows = [(k, d[k]) for k in ("origin_location", "dim_nko", "cond_a", "cond_28",
                                     "witness_mass", "x0_mass")]
        if self.origin_face is not None:
            rows.insert(1, ("origin_face", f"{self.origin_face['kind']} "
                                           f"{self.origin_face['vertex_ids']}"))
        if d["cond_b_residuals"] is not None:
            vals = [abs(r) for r in d["cond_b_residuals"] if r is not None]
            rows.append(("cond_b max |residual|", max(vals) if vals else 0.0))
        rows += [(f"verdict[{k}]", v) for k, v in d["verdicts"].items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


_FACE_KINDS = {0: "vertex", 1: "edge", 2: "facet"}


def _origin_face(P, cone):
    if cone.dim == 0:
        return None
    # any direction in the relative interior of N(K, o) exposes the minimal face
    u = cone.generators.sum(axis=0)
    pts = face(P, u)
    ids = sorted(int(np.flatnonzero(np.all(np.abs(P.vertices - z) <= P.tol, axis=1))[0])
                 for z in pts)
    k = P.dim - cone.dim
    kind = "facet" if k == P.dim - 1 else _FACE_KINDS.get(k, f"{k}-face")
    return {"kind": kind, "dim": k, "vertex_ids": ids}


def x0_facets(P):
    """Indices of facets through the origin (their union is X0)."""
    return [int(i) for i in P.incident_facets(np.zeros(P.dim))]


def in_x0(P, x):
    """True if the boundary point x lies in some face F(P, u), u in N(P, o)."""
    x = np.asarray(x, dtype=float)
    return any(abs(P.normals[i] @ x - P.h[i]) <= P.tol for i in x0_facets(P))


def diagnose(P, p, problem=None):
    """Origin position, validity conditions and the X0 decomposition of P."""
    if p >= 1:
        raise UnsupportedExponentError(f"p = {p} is not < 1")
    o = np.zeros(P.dim)
    if not P.contains(o):
        raise DomainError("origin is not in the polytope")
    cone = normal_cone(P, o)
    areas = P.facet_areas()
    total = float(areas.sum())
    fac = x0_facets(P)
    # S_K(N(K,o) ∩ S^{n-1}): facets whose normal lies in the cone, i.e. through o
    witness = float(sum(areas[i] for i in range(P.n_facets) if cone.dim > 0
                        and cone.contains(P.normals[i], ANGLE_TOL)))
    x0_mass = float(areas[fac].sum()) if fac else 0.0
    verts = sorted({int(k) for i in fac for k in P.facet_vertices[i]})
    cond_a = cone.dim < P.dim
    cond_28 = witness <= MASS_TOL * total
    resid = None
    verdicts = {
        "cond_a": Verdict.PASS if cond_a else Verdict.FAIL,
        "cond_28": Verdict.PASS if cond_28 else Verdict.FAIL,
    }
    if problem is not None:
        resid = _cond_b(P, p, problem)
        live = resid[~np.isnan(resid)]
        ok = live.size == 0 or np.abs(live).max() <= RESIDUAL_TOL
        verdicts["cond_b"] = Verdict.PASS if ok else Verdict.FAIL
        verdicts["lemma51"] = lemma51_assert(P, p, problem)
    else:
        verdicts["cond_b"] = Verdict.NOT_APPLICABLE
    return RegularityReport(
        origin_location="interior" if cone.dim == 0 else "boundary",
        origin_face=_origin_face(P, cone),
        dim_nko=int(cone.dim), cond_a=bool(cond_a), cond_b_residuals=resid,
        cond_28=bool(cond_28), witness_mass=witness, x0_facets=fac,
        x0_vertices=verts, x0_mass=x0_mass, verdicts=verdicts)


def _cond_b(P, p, problem):
    """h_i^(1-p) A_i / f_i - 1 per atom; NaN where h_K(u_i) = 0."""
    areas = P.facet_areas()
    out = np.empty(len(problem.normals))
    for i, (u, f) in enumerate(zip(problem.normals, problem.targets)):
        h = float(np.max(P.vertices @ u))
        if abs(h) <= P.tol:
            out[i] = np.nan
            continue
        k = P.facet_index(u)
        A = areas[k] if k is not None else 0.0
        out[i] = h ** (1.0 - p) * A / f - 1.0
    return out


def lemma51_assert(P, p, problem):
    """For p <= 2 - n the origin must be interior; anything else is an anomaly."""
    n = P.dim
    if p > 2 - n:
        return Verdict.NOT_APPLICABLE
    if np.any(problem.targets <= 0):
        return Verdict.NOT_APPLICABLE
    margin = float(np.min(P.h))
    return Verdict.PASS if margin > INTERIOR_MARGIN * P.diameter else Verdict.FAIL


def _nonsmooth_elements(P):
    """Counts of boundary elements whose normal cone has dimension > 1."""
    counts = {"vertices": len(P.vertices)}
    if P.dim == 3:
        pairs = set()
        for cyc in P.facet_vertices:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                pairs.add((min(a, b), max(a, b)))
        counts["edges"] = len(pairs)
    return counts


def theorem_verdicts(P, p):
    """Hypothesis / conclusion pairs of the smoothness statements on P.

    Smoothness of a polytope fails at every vertex (and edge in 3D); those
    counts are reported so the caller can judge the modelled smooth body.
    """
    if p >= 1:
        raise UnsupportedExponentError(f"p = {p} is not < 1")
    n = P.dim
    o = np.zeros(n)
    cone = normal_cone(P, o) if P.contains(o) else None
    interior = cone is not None and cone.dim == 0
    on_boundary = cone is not None and cone.dim > 0
    bad = _nonsmooth_elements(P)
    smooth = sum(bad.values()) == 0
    areas = P.facet_areas()
    x0_mass = float(areas[x0_facets(P)].sum()) if on_boundary else 0.0
    out = {}
    out["smooth_origin"] = {
        "hypothesis": bool(on_boundary and cone.dim == 1),
        "conclusion": smooth, "nonsmooth_elements": bad,
        "dim_nko": None if cone is None else int(cone.dim)}
    out["null_x0"] = {
        "hypothesis": bool(x0_mass <= MASS_TOL * areas.sum()),
        "conclusion": smooth, "x0_mass": x0_mass, "nonsmooth_elements": bad}
    out["interior_origin"] = {
        "hypothesis": bool(p <= 2 - n), "conclusion": bool(interior)}
    if on_boundary:
        bound = (n + 1) / 2
        out["normal_cone_bound"] = {
            "hypothesis": True, "conclusion": bool(cone.dim < bound),
            "dim_nko": int(cone.dim), "bound": bound}
    else:
        out["normal_cone_bound"] = {"hypothesis": False, "conclusion": None,
                                    "verdict": Verdict.NOT_APPLICABLE.value}
    return out
