"""Independent reference computations used by the tests.

None of these call into the package's measure code; they only evaluate
functions pointwise.
"""
import itertools

import numpy as np


def pl_candidates(grads, offs, square=1.0):
    """Every point of [-s, s]^2 where a PL minimiser of v - <xi, x> could sit.

    All pairwise crossings of the pieces inside the square, their crossings
    with the square's edges, and the corners.  A superset of the vertices of
    the linearity subdivision restricted to the square.
    """
    s = square
    pts = [np.array(c, float) for c in itertools.product([-s, s], repeat=2)]
    k = len(grads)
    for i, j, l in itertools.combinations(range(k), 3):
        M = np.array([grads[i] - grads[j], grads[i] - grads[l]])
        if abs(np.linalg.det(M)) < 1e-14:
            continue
        pts.append(np.linalg.solve(M, [offs[j] - offs[i], offs[l] - offs[i]]))
    for i, j in itertools.combinations(range(k), 2):
        da, db = grads[i] - grads[j], offs[j] - offs[i]
        for axis in (0, 1):
            other = 1 - axis
            for fixed in (-s, s):
                if abs(da[other]) < 1e-14:
                    continue
                x = np.empty(2)
                x[axis] = fixed
                x[other] = (db - da[axis] * fixed) / da[other]
                pts.append(x)
    pts = np.array(pts)
    pts = pts[np.all(np.abs(pts) <= s * (1 + 1e-12), axis=1)]
    return pts[on_crease(pts, grads, offs, s)]


def on_crease(pts, grads, offs, square=1.0):
    """Mask of points that are corners, or where at least two pieces tie for the max
    (three in the interior).  Crossings of pieces that lie below v are dropped."""
    vals = pts @ grads.T + offs
    top = vals.max(axis=1, keepdims=True)
    ties = (vals >= top - 1e-9 * (1 + np.abs(top))).sum(axis=1)
    edge = np.isclose(np.abs(pts), square, rtol=0, atol=1e-12)
    need = 3 - edge.sum(axis=1)
    return ties >= need


def monte_carlo_subgradient_mass(grads, offs, atoms, draws=10 ** 6, seed=0, chunk=100_000):
    """Estimate mu_v at each atom by sampling slopes xi.

    xi lies in the subgradient at x exactly when x minimises v(y) - <xi, y>
    over the square; the minimiser is located by brute force over
    :func:`pl_candidates` and the draw is credited to the atom it lands on.
    Draws whose minimiser is not an atom (a boundary point) are dropped.
    """
    rng = np.random.default_rng(seed)
    lo, hi = grads.min(axis=0), grads.max(axis=0)
    box_area = float(np.prod(hi - lo))
    cand = pl_candidates(grads, offs)
    vals = np.max(cand @ grads.T + offs, axis=1)
    owner = np.full(len(cand), -1)
    for k, x in enumerate(atoms):
        owner[np.linalg.norm(cand - x, axis=1) <= 1e-9] = k
    counts = np.zeros(len(atoms))
    left = draws
    while left > 0:
        m = min(chunk, left)
        xi = lo + (hi - lo) * rng.random((m, 2))
        best = np.argmin(vals[None, :] - xi @ cand.T, axis=1)
        hit = owner[best]
        counts += np.bincount(hit[hit >= 0], minlength=len(atoms))
        left -= m
    return counts / draws * box_area
