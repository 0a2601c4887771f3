"""Discrete L_p Minkowski problem for p < 1.

Given unit normals u_i and targets f_i > 0, find support numbers h_i > 0
such that the polytope {x : <u_i, x> <= h_i} satisfies

    h_i^(1-p) A_i(h) = f_i    for every i,

where A_i(h) is the (n-1)-volume of facet i.  The iteration is the damped
multiplicative fixed point

    h_i <- h_i (f_i / (h_i^(1-p) A_i(h)))^(gamma / (n - p)),

which is exact in one step on isotropic data.  When a fixed-point step
fails to lower the largest residual, a Newton step in log h is taken
instead (the fixed point is a saddle for some data with 0 < p < 1), with a
Levenberg-Marquardt backup.  If that stalls too, the loop is restarted
from the minimiser of a volume-normalised functional whose critical
points solve the problem up to a constant factor.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import HalfspaceIntersection, QhullError
from scipy.spatial.distance import pdist

from .convex import ANGLE_TOL, Polytope, _plane_basis, chebyshev_center, support
from .errors import DomainError, ProblemError, SchemaError, UnsupportedExponentError

log = logging.getLogger(__name__)

UNSUPPORTED = "unsupported"


@dataclass(frozen=True, eq=False)
class LpProblem:
    normals: np.ndarray
    targets: np.ndarray
    p: float
    tau1: float | None = None
    tau2: float | None = None

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.normals, dtype=float))
        f = np.asarray(self.targets, dtype=float).reshape(-1)
        if u.shape[1] not in (2, 3):
            raise ProblemError("only dimensions 2 and 3 are supported")
        if len(u) != len(f):
            raise ProblemError("normals and targets differ in length")
        if self.p >= 1:
            raise UnsupportedExponentError(f"p = {self.p} is not < 1")
        norms = np.linalg.norm(u, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ProblemError("normals must be unit vectors")
        u = u / norms[:, None]
        for i in range(len(u)):
            if np.any(np.linalg.norm(u[i + 1:] - u[i], axis=1) <= ANGLE_TOL):
                raise ProblemError("normals must be pairwise distinct")
        if np.any(f <= 0):
            raise ProblemError("targets must be strictly positive")
        tau1 = 0.5 * f.min() if self.tau1 is None else float(self.tau1)
        tau2 = 2.0 * f.max() if self.tau2 is None else float(self.tau2)
        if not (0 < tau1 < f.min() and f.max() < tau2):
            raise ProblemError("need 0 < tau1 < min f and max f < tau2")
        if not positively_spanning(u):
            raise ProblemError("normals do not span R^n positively")
        u.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "normals", u)
        object.__setattr__(self, "targets", f)
        object.__setattr__(self, "tau1", tau1)
        object.__setattr__(self, "tau2", tau2)

    @property
    def dim(self):
        return self.normals.shape[1]

    def scaled(self, lam):
        return LpProblem(self.normals, lam * self.targets, self.p)

    def to_dict(self):
        return {"dim": self.dim, "p": self.p, "tau1": self.tau1, "tau2": self.tau2,
                "atoms": [{"u": u.tolist(), "f": float(f)}
                          for u, f in zip(self.normals, self.targets)]}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise SchemaError("$", "expected an object")
        dim = data.get("dim")
        if dim not in (2, 3):
            raise SchemaError("dim", "must be 2 or 3")
        p = data.get("p")
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise SchemaError("p", "expected a number")
        atoms = data.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            raise SchemaError("atoms", "expected a non-empty list")
        us, fs = [], []
        for k, a in enumerate(atoms):
            u = a.get("u") if isinstance(a, dict) else None
            if not isinstance(u, list) or len(u) != dim or not all(
                    isinstance(t, (int, float)) for t in u):
                raise SchemaError(f"atoms[{k}].u", f"expected {dim} numbers")
            if not isinstance(a.get("f"), (int, float)):
                raise SchemaError(f"atoms[{k}].f", "expected a number")
            us.append(u)
            fs.append(float(a["f"]))
        try:
            return cls(np.array(us, float), np.array(fs), float(p),
                       data.get("tau1"), data.get("tau2"))
        except (ProblemError, UnsupportedExponentError) as exc:
            raise SchemaError("atoms", str(exc)) from None


def positively_spanning(normals):
    """True if sum lambda_i u_i = 0 has a solution with every lambda_i > 0.

    Together with full rank this means the origin is interior to conv(u_i).
    """
    u = np.asarray(normals, dtype=float)
    if np.linalg.matrix_rank(u) < u.shape[1]:
        return False
    # scale invariance: lambda_i > 0 feasible iff lambda_i >= 1 feasible
    res = linprog(np.zeros(len(u)), A_eq=u.T, b_eq=np.zeros(u.shape[1]),
                  bounds=[(1, None)] * len(u), method="highs")
    return res.status == 0


@dataclass
class Cells:
    """Facet data of {x : <u_i, x> <= h_i} computed straight from Qhull.

    Lighter than building a validated :class:`Polytope`; used inside the
    solver loops.  ``incidence[k, i]`` says vertex k lies on plane i.
    """
    vertices: np.ndarray
    incidence: np.ndarray
    areas: np.ndarray
    volume: float
    center: np.ndarray


def cells(normals, h, center=None):
    """Compute :class:`Cells`; ``center`` is an optional interior-point hint."""
    u = np.asarray(normals, dtype=float)
    h = np.asarray(h, dtype=float)
    if not np.all(np.isfinite(h)):
        raise DomainError("support numbers must be finite")
    n = u.shape[1]
    if center is None or np.min(h - u @ center) <= 1e-6 * np.abs(h).max():
        center = chebyshev_center(u, h)
        if center is None:
            raise DomainError("halfspace system has empty interior")
    try:
        pts = HalfspaceIntersection(np.hstack([u, -h[:, None]]), center).intersections
    except QhullError as exc:
        raise DomainError(f"halfspace intersection failed: {exc}") from None
    if not np.all(np.isfinite(pts)):
        raise DomainError("halfspace system is unbounded")
    diam = float(np.ptp(pts, axis=0).max())
    inc = np.abs(pts @ u.T - h) <= 1e-10 * diam
    A = np.zeros(len(u))
    for i in range(len(u)):
        q = pts[inc[:, i]]
        if len(q) < n:
            continue
        if n == 2:
            s = q @ np.array([-u[i, 1], u[i, 0]])
            A[i] = s.max() - s.min()
        else:
            # facet vertices sorted by angle, then the shoelace formula
            y = q @ np.array(_plane_basis(u[i])).T
            y = y - y.mean(axis=0)
            y = y[np.argsort(np.arctan2(y[:, 1], y[:, 0]))]
            z = np.roll(y, -1, axis=0)
            A[i] = 0.5 * abs(np.sum(y[:, 0] * z[:, 1] - y[:, 1] * z[:, 0]))
    A[A <= 1e-12 * diam ** (n - 1)] = 0.0
    vol = float((h - u @ center) @ A) / n
    return Cells(pts, inc, A, vol, center)


def facet_areas(normals, h):
    """Polytope with the given support numbers and the area of each normal's facet.

    Normals that do not carry a facet get area 0.
    """
    P = Polytope.from_halfspaces(normals, h)
    areas = P.facet_areas()
    A = np.zeros(len(normals))
    idx = [P.facet_index(u) for u in normals]
    for i, k in enumerate(idx):
        if k is not None:
            A[i] = areas[k]
    return P, A, idx


def area_jacobian(normals, h, cl=None):
    """dA_i/dh_j, computed from the adjacency of the facets.

    Off-diagonal: L_ij / sin(theta_ij) for facets sharing an (n-2)-face of
    measure L_ij; diagonal: -sum_j L_ij cot(theta_ij).
    """
    u = np.asarray(normals, dtype=float)
    cl = cells(u, h) if cl is None else cl
    m, n = u.shape
    live = np.flatnonzero(cl.areas > 0)
    J = np.zeros((m, m))
    for a_pos, i in enumerate(live):
        for j in live[a_pos + 1:]:
            shared = cl.vertices[cl.incidence[:, i] & cl.incidence[:, j]]
            if n == 2:
                if len(shared) == 0:
                    continue
                L = 1.0
            else:
                if len(shared) < 2:
                    continue
                L = float(pdist(shared).max())
                if L == 0.0:
                    continue
            c = float(np.clip(u[i] @ u[j], -1.0, 1.0))
            s = np.sqrt(max(1.0 - c * c, 1e-300))
            J[i, j] = J[j, i] = L / s
            J[i, i] -= L * c / s
            J[j, j] -= L * c / s
    return J


@dataclass
class SolveResult:
    polytope: Polytope
    h: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    boundary: bool
    history: list = field(default_factory=list)
    newton_steps: int = 0
    facet_deaths: int = 0
    variational: bool = False

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residuals)))

    def to_dict(self):
        return {
            "converged": self.converged,
            "boundary": self.boundary,
            "iterations": self.iterations,
            "newton_steps": self.newton_steps,
            "facet_deaths": self.facet_deaths,
            "variational": self.variational,
            "max_residual": self.max_residual,
            "h": self.h.tolist(),
            "residuals": self.residuals.tolist(),
            "history": [float(x) for x in self.history],
            "polytope": self.polytope.to_dict(),
        }


def _residuals(problem, h, A):
    return h ** (1.0 - problem.p) * A / problem.targets - 1.0


class _Loop:
    """Shared state of the fixed-point / Newton iteration."""

    def __init__(self, problem, h, damping):
        self.problem = problem
        self.expo = damping / (problem.dim - problem.p)
        self.iters = self.newton = self.deaths = 0
        self.mu = 1e-6
        self.set(h, self.evaluate(h))
        self.history = [self.err]

    def evaluate(self, h):
        if not np.all(np.isfinite(h)) or np.any(h <= 0):
            return None
        try:
            cl = cells(self.problem.normals, h, getattr(self, "cl", None) and self.cl.center)
        except DomainError:
            return None
        return cl, _residuals(self.problem, h, cl.areas)

    def set(self, h, ev):
        self.h, (self.cl, self.rho) = h, ev
        self.err = float(np.abs(self.rho).max())

    def accept(self, h, ev):
        self.set(h, ev)
        self.history.append(self.err)

    def run(self, tol, max_iter):
        u, f, p = self.problem.normals, self.problem.targets, self.problem.p
        stalled = 0
        while self.err > tol and self.iters < max_iter:
            self.iters += 1
            A = self.cl.areas
            dead = A <= 0
            if np.any(dead):
                # keep every normal's equation active: pull dead facets onto the hull
                self.deaths += int(dead.sum())
                h = self.h.copy()
                h[dead] = (self.cl.vertices @ u[dead].T).max(axis=0) * (1 - 1e-6)
                ev = self.evaluate(h)
                if ev is None:
                    return False
                self.accept(h, ev)
                continue
            h_fp = self.h * (f / (self.h ** (1.0 - p) * A)) ** self.expo
            ev = self.evaluate(h_fp)
            if ev is not None and np.abs(ev[1]).max() < self.err:
                self.accept(h_fp, ev)
                continue
            if not self._lm_step():
                log.info("no descent step at iteration %d", self.iters)
                return False
            # progress too slow to be worth continuing
            stalled = stalled + 1 if self.history[-1] > 0.95 * self.history[-2] else 0
            if stalled >= 40:
                return False
        return self.err <= tol

    def _lm_step(self):
        """Newton step on F(x) = log(1 + rho), x = log h, with Levenberg-Marquardt backup.

        Both are accepted when they lower |F|^2 (the fixed-point step is
        judged by the largest residual instead).
        """
        p, h, A = self.problem.p, self.h, self.cl.areas
        dA = area_jacobian(self.problem.normals, h, self.cl)
        J = (1.0 - p) * np.eye(len(h)) + (dA * h[None, :]) / A[:, None]
        F = np.log1p(self.rho)
        merit = F @ F
        step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        t = 1.0
        for _ in range(12):
            if self._try_step(t * step, merit):
                return True
            t *= 0.5
        JtJ, g = J.T @ J, J.T @ F
        for _ in range(25):
            step = np.linalg.solve(JtJ + self.mu * np.eye(len(h)), -g)
            if self._try_step(step, merit):
                self.mu = max(self.mu / 3.0, 1e-12)
                return True
            self.mu *= 4.0
        return False

    def _try_step(self, step, merit):
        h_new = self.h * np.exp(np.clip(step, -1.0, 1.0))
        ev = self.evaluate(h_new)
        if ev is None or np.any(ev[0].areas <= 0):
            return False
        F_new = np.log1p(ev[1])
        if F_new @ F_new >= merit:
            return False
        self.accept(h_new, ev)
        self.newton += 1
        return True


def solve(problem, tol=1e-10, max_iter=500, damping=1.0, boundary_tol=1e-8, variational=True):
    """Solve h_i^(1-p) A_i(h) = f_i, starting from h = 1.

    If the fixed-point / Newton loop stalls and ``variational`` is set, the
    iterate is replaced by the minimiser of the volume-normalised functional
    (see :func:`variational_start`) and the loop resumes from there.

    Returns a :class:`SolveResult`; non-convergence is reported through
    ``converged=False``, never raised.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not 0 < damping <= 1:
        raise DomainError("damping must lie in (0, 1]")
    loop = _Loop(problem, np.ones(len(problem.normals)), damping)
    ok = loop.run(tol, max_iter)
    used = False
    if not ok and variational and loop.iters < max_iter:
        h0 = variational_start(problem)
        if h0 is not None:
            ev = loop.evaluate(h0)
            if ev is not None:
                used = True
                loop.accept(h0, ev)
                loop.run(tol, max_iter)
    return _result(problem, loop, tol, boundary_tol, used)


def _result(problem, loop, tol, boundary_tol, used):
    u = problem.normals
    P = Polytope.from_halfspaces(u, loop.h)
    idx = [P.facet_index(v) for v in u]
    h_out = np.array([P.h[k] if k is not None else support(P, u[i]) for i, k in enumerate(idx)])
    return SolveResult(
        polytope=P, h=h_out, residuals=loop.rho, iterations=loop.iters,
        converged=bool(loop.err <= tol),
        boundary=bool(h_out.min() < boundary_tol * P.diameter),
        history=loop.history, newton_steps=loop.newton, facet_deaths=loop.deaths,
        variational=used)


# -- variational start ----------------------------------------------------------


def _phi(f, t, p):
    return float(np.sum(f * np.log(t))) if p == 0 else float(np.sum(f * t ** p)) / p


def best_translation(normals, h, targets, p, xi=None, max_iter=100):
    """Maximiser over xi of Phi(h - <u, xi>), Phi(t) = sum f t^p / p (sum f log t at p = 0).

    Phi is strictly concave in xi on the interior, so Newton with backtracking
    converges from any interior start.
    """
    u, f = normals, targets
    if xi is None or np.any(h - u @ xi <= 0):
        xi = chebyshev_center(u, h)
        if xi is None:
            raise DomainError("halfspace system has empty interior")
    for _ in range(max_iter):
        t = h - u @ xi
        g = -(u.T @ (f * t ** (p - 1)))
        H = (p - 1) * (u.T * (f * t ** (p - 2))) @ u
        step = np.linalg.solve(H, -g)
        f0 = _phi(f, t, p)
        s = 1.0
        while s > 1e-12:
            tn = h - u @ (xi + s * step)
            if np.all(tn > 0) and _phi(f, tn, p) >= f0 - 1e-14 * abs(f0):
                break
            s *= 0.5
        else:
            break
        xi = xi + s * step
        if np.linalg.norm(s * step) < 1e-13 * (1 + np.abs(h).max()):
            break
    return xi


def _objective(x, problem, state):
    """Volume-normalised functional in x = log h and its gradient.

    J = V^(-p/n) Phi for p != 0 and J = Phi - (sum f / n) log V for p = 0,
    with Phi evaluated at the best translate.  A (mean x)^2 term pins the
    scale, which J itself ignores.
    """
    bad = np.inf, np.zeros_like(x)
    if not np.all(np.isfinite(x)) or np.abs(x).max() > 25:
        return bad
    u, f, p, n = problem.normals, problem.targets, problem.p, problem.dim
    h = np.exp(x)
    try:
        cl = cells(u, h)
        xi = best_translation(u, h, f, p, state.get("xi"))
    except (DomainError, np.linalg.LinAlgError):
        return bad
    state["xi"] = xi
    t, A, V = h - u @ xi, cl.areas, cl.volume
    phi = _phi(f, t, p)
    if p == 0:
        val = phi - f.sum() / n * np.log(V)
        g = f / t - f.sum() / (n * V) * A
    else:
        s = V ** (-1.0 / n)
        val = s ** p * phi
        g = s ** p * (f * t ** (p - 1) - p / (n * V) * A * phi)
    m = x.mean()
    return val + m * m, g * h + 2 * m / len(x)


def variational_start(problem, rounds=8):
    """Approximate solution from minimising the normalised functional.

    Critical points are polytopes with h^(1-p) A = c f; the constant is then
    removed by rescaling.  Between rounds the body is re-centred at the best
    translate, which keeps L-BFGS away from the flat translation directions.
    Returns None if no usable point is found.
    """
    u, f, p, n = problem.normals, problem.targets, problem.p, problem.dim
    h = np.ones(len(u))
    try:
        for _ in range(rounds):
            res = minimize(_objective, np.log(h), args=(problem, {}), jac=True, method="L-BFGS-B",
                           options=dict(maxiter=500, gtol=1e-10, ftol=1e-15))
            if not np.isfinite(res.fun):
                return None
            h = np.exp(res.x)
            t = h - u @ best_translation(u, h, f, p)
            h = t / np.exp(np.log(t).mean())
            cl = cells(u, h)
            dead = cl.areas <= 0
            if dead.any():
                # the functional is nearly flat once a facet has left the body
                h[dead] = (cl.vertices @ u[dead].T).max(axis=0) * (1 - 1e-2)
            elif res.nit < 2:
                break
        A = cells(u, h).areas
    except (DomainError, np.linalg.LinAlgError):
        return None
    live = A > 0
    if not live.any():
        return None
    lam = np.median(f[live] / (h[live] ** (1 - p) * A[live])) ** (1.0 / (n - p))
    return h * lam


def residual(P, problem):
    """rho_i = h_i^(1-p) A_i / f_i - 1 for a polytope whose facets match the problem."""
    if P.dim != problem.dim:
        raise DomainError("polytope and problem differ in dimension")
    idx = [P.facet_index(u) for u in problem.normals]
    if any(k is None for k in idx) or len(idx) != P.n_facets:
        raise DomainError("polytope facets do not match the problem normals")
    areas = P.facet_areas()
    h = np.array([P.h[k] for k in idx])
    A = np.array([areas[k] for k in idx])
    h = np.where(np.abs(h) <= P.tol, 0.0, h)
    return _residuals(problem, h, A)


# -- closed-form oracle -------------------------------------------------------


def _box_axes(u):
    n = u.shape[1]
    axes = {}
    for i, v in enumerate(u):
        k = int(np.argmax(np.abs(v)))
        if abs(abs(v[k]) - 1) > 1e-12 or np.sum(np.abs(v) > 1e-12) != 1:
            return None
        axes[(k, int(np.sign(v[k])))] = i
    if len(axes) != 2 * n or len(u) != 2 * n:
        return None
    return axes


def _regular_polygon_phase(u):
    k = len(u)
    ang = np.sort(np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * np.pi))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    if k < 3 or np.any(np.abs(gaps - 2 * np.pi / k) > 1e-10):
        return None
    return ang[0]


def bisect(fn, lo, hi, xtol=1e-12):
    flo = fn(lo)
    if flo * fn(hi) > 0:
        raise ValueError("root is not bracketed")
    while hi - lo > xtol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_small(problem):
    """Exact solution for boxes and for regular polygons with equal targets.

    Returns a :class:`Polytope`, or :data:`UNSUPPORTED` outside those families
    (including the box family when its log-linear system is singular).
    """
    u, f, p, n = problem.normals, problem.targets, problem.p, problem.dim
    axes = _box_axes(u)
    if axes is not None:
        # facet i has area prod_{j != i} w_j with widths w_j = h_+j + h_-j
        s = np.array([(f[axes[(k, 1)]] / f[axes[(k, -1)]]) ** (1 / (1 - p)) for k in range(n)])
        frac = s / (1 + s)
        M = (1 - p) * np.eye(n) + (np.ones((n, n)) - np.eye(n))
        if abs(np.linalg.det(M)) < 1e-12:
            return UNSUPPORTED
        rhs = np.array([np.log(f[axes[(k, 1)]]) - (1 - p) * np.log(frac[k]) for k in range(n)])
        w = np.exp(np.linalg.solve(M, rhs))
        h = np.empty(len(u))
        for k in range(n):
            h[axes[(k, 1)]] = w[k] * frac[k]
            h[axes[(k, -1)]] = w[k] * (1 - frac[k])
        return Polytope.from_halfspaces(u, h)
    if n == 2 and np.allclose(f, f[0], rtol=0, atol=0):
        phase = _regular_polygon_phase(u)
        if phase is None:
            return UNSUPPORTED
        k = len(u)
        edge = lambda r: 2 * r * np.tan(np.pi / k)
        r = bisect(lambda r: r ** (1 - p) * edge(r) - f[0], 1e-12, 1e6)
        return Polytope.from_halfspaces(u, np.full(k, r))
    return UNSUPPORTED
