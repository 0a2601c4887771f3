"""Randomised invariant checks behind the ``selftest`` command.

Each check draws its data from a seeded generator and returns a
:class:`Check`; nothing here raises on a failed property.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .convex import Polytope, box, face, normal_cone, regular_polygon, support, surface_area_measure
from .monge_ampere import Box, PLConvexFunction, ma_measure
from .solver import LpProblem, positively_spanning, solve


@dataclass
class Check:
    name: str
    seed: int
    passed: bool
    worst: float       # worst observed error, in the check's own units
    tolerance: float

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<22} seed={self.seed}  worst={self.worst:.3e}  tol={self.tolerance:.0e}"


def random_polytope(rng, dim=None, points=None):
    """Hull of random points (Gaussian cloud) containing the origin in its interior."""
    dim = dim or int(rng.choice([2, 3]))
    k = points or int(rng.integers(dim + 4, 20))
    while True:
        pts = rng.normal(size=(k, dim))
        pts -= pts.mean(axis=0)
        P = Polytope.from_vertices(pts)
        if np.min(P.h) > 1e-3 * P.diameter:
            return P


def random_problem(rng, dim, p, facets=None, spread=0.5):
    """Random positively spanning normals with targets uniform in [1 - spread, 1 + spread]."""
    k = facets or int(rng.integers(2 * dim + 2, 6 * dim - 2))
    while True:
        u = _unit(rng, dim, k)
        if positively_spanning(u) and np.min(pdist(u)) > 0.05:
            return LpProblem(u, rng.uniform(1 - spread, 1 + spread, size=k), p)


def _unit(rng, dim, k):
    u = rng.normal(size=(k, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def check_minkowski(rng, seed):
    worst = 0.0
    for _ in range(10):
        S = surface_area_measure(random_polytope(rng))
        err = np.abs(S.weights @ S.normals).max() / S.total
        worst = max(worst, float(err))
    return Check("minkowski_relation", seed, worst <= 1e-10, worst, 1e-10)


def check_subgradient(rng, seed):
    """h_P(u) = <z, u> for every vertex z of F(P, u), u a facet normal or random."""
    worst = 0.0
    for _ in range(10):
        P = random_polytope(rng)
        dirs = np.vstack([P.normals, _unit(rng, P.dim, 20)])
        for u in dirs:
            h = support(P, u)
            err = np.abs(face(P, u) @ u - h).max() / P.diameter
            worst = max(worst, float(err))
    return Check("subgradient_identity", seed, worst <= 1e-9, worst, 1e-9)


def check_additivity(rng, seed):
    """mu_v over two halves of a box equals mu_v over the box."""
    worst = 0.0
    for _ in range(10):
        k = int(rng.integers(3, 13))
        v = PLConvexFunction([[-1, -1], [1, -1], [1, 1], [-1, 1]],
                             rng.normal(size=(k, 2)), rng.normal(size=k))
        lo, hi = np.array([-1.0, -1.0]), np.array([0.999, 0.999])
        axis = int(rng.integers(2))
        cut = float(rng.uniform(-0.9, 0.9))
        mid_hi, mid_lo = hi.copy(), lo.copy()
        mid_hi[axis] = cut
        mid_lo[axis] = cut
        whole = ma_measure(v, Box(lo, hi))
        parts = ma_measure(v, Box(lo, mid_hi)) + ma_measure(v, Box(mid_lo, hi))
        err = abs(whole - parts) / max(whole, 1e-300)
        worst = max(worst, float(err))
    return Check("measure_additivity", seed, worst <= 1e-10, worst, 1e-10)


def check_homogeneity(rng, seed):
    """support(P, lam u) = lam support(P, u) and face additivity on normal cones."""
    worst = 0.0
    for _ in range(10):
        P = random_polytope(rng)
        for u in _unit(rng, P.dim, 20):
            lam = float(rng.uniform(0.1, 10))
            err = abs(support(P, lam * u) - lam * support(P, u)) / (lam * P.diameter)
            worst = max(worst, err)
        z = P.vertices[int(rng.integers(len(P.vertices)))]
        g = normal_cone(P, z).generators
        a = rng.uniform(0.1, 2.0, size=len(g))
        err = abs(support(P, a @ g) - float(a @ np.array([support(P, x) for x in g]))) / P.diameter
        worst = max(worst, err)
    return Check("homogeneity", seed, worst <= 1e-9, worst, 1e-9)


def check_scaling(rng, seed):
    """Targets lam f give support numbers lam^(1/(n-p)) h on symmetric instances."""
    worst = 0.0
    for _ in range(2):
        p = float(rng.choice([-1.0, -0.5, 0.25, 0.5]))
        if rng.integers(2):
            P = box(rng.uniform(0.5, 2.0, size=3))
        else:
            P = regular_polygon(int(rng.choice([6, 8, 12])), radius=float(rng.uniform(0.5, 2)))
        f = P.h ** (1 - p) * P.facet_areas()
        lam = float(rng.uniform(0.2, 5.0))
        base = solve(LpProblem(P.normals, f, p), tol=1e-12)
        scaled = solve(LpProblem(P.normals, lam * f, p), tol=1e-12)
        if not (base.converged and scaled.converged):
            return Check("scaling_covariance", seed, False, np.inf, 1e-6)
        expect = lam ** (1 / (P.dim - p)) * base.h
        worst = max(worst, float(np.max(np.abs(scaled.h - expect) / expect)))
    return Check("scaling_covariance", seed, worst <= 1e-6, worst, 1e-6)


CHECKS = (check_minkowski, check_subgradient, check_additivity, check_homogeneity, check_scaling)


def run_selftest(seeds=(0, 1, 2, 3, 4)):
    """Run every check under every seed; returns (checks, seconds)."""
    t0 = time.perf_counter()
    out = []
    for seed in seeds:
        for fn in CHECKS:
            out.append(fn(np.random.default_rng([seed, CHECKS.index(fn)]), seed))
    return out, time.perf_counter() - t0
