"""Command-line entry point.

    python -m lpmink solve --input problem.json --output result.json
    python -m lpmink verify-example ex32 --n 3 --p 0.5 --beta 0.05 --output ex32.json
    python -m lpmink diagnose --input body.json --p 0
    python -m lpmink transfer --n 3 --p 0 --grid 21 --output g.csv
    python -m lpmink selftest

Exit codes: 0 ok, 2 solver did not converge (partial result still
written), 64 bad input, 70 internal invariant failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import densities
from .closed_forms import Example32Params, Example42Params, ex32_verify, ex42_eval, ex42_limit, ex42_value
from .convex import Polytope
from .diagnostics import diagnose, theorem_verdicts
from .errors import DomainError, LpMinkError, ParameterError, SchemaError
from .invariants import run_selftest
from .monge_ampere import tangent_basis, transfer_density
from .solver import LpProblem, solve

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INPUT = 64
EXIT_INTERNAL = 70

log = logging.getLogger("lpmink")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    output: Path | None = None
    tol: float | None = None
    max_iter: int = 500
    damping: float = 1.0
    example: str | None = None
    n: int | None = None
    p: float | None = None
    beta: float | None = None
    seed: int | None = None
    grid: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.max_iter < 1:
            raise UsageError("--max-iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise UsageError("--damping must lie in (0, 1]")
        if any(g < 2 for g in self.grid):
            raise UsageError("--grid sizes must be at least 2")


def _grid(text):
    try:
        parts = tuple(int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or NxM, got {text!r}") from None
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected N or NxM, got {text!r}")
    return parts


def build_parser():
    parser = _Parser(prog="lpmink", description="Discrete L_p Minkowski problem tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, need_input=False):
        sp.add_argument("--input", type=Path, required=need_input)
        sp.add_argument("--output", type=Path)

    sp = sub.add_parser("solve", help="solve an L_p problem given as JSON")
    common(sp, need_input=True)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--damping", type=float, default=1.0)

    sp = sub.add_parser("verify-example", help="sweep a closed-form example")
    sp.add_argument("example", choices=["ex32", "ex42"])
    common(sp)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--beta", type=float, default=0.05)
    sp.add_argument("--grid", type=_grid, default=None)

    sp = sub.add_parser("diagnose", help="regularity report for a polytope")
    common(sp, need_input=True)
    sp.add_argument("--p", type=float, required=True)

    sp = sub.add_parser("transfer", help="tabulate the transferred density g(y)")
    common(sp)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--p", type=float, default=0.0)
    sp.add_argument("--grid", type=_grid, default=(21,))

    sp = sub.add_parser("selftest", help="run the randomised invariant suite")
    sp.add_argument("--output", type=Path)
    sp.add_argument("--seed", type=int, default=None)
    return parser


def parse_config(argv):
    ns = build_parser().parse_args(argv)
    return RunConfig(**{k: v for k, v in vars(ns).items() if v is not None})


# -- output helpers -------------------------------------------------------------


def write_atomic(path, text):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def format_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["%.17g" % x if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _sibling(path, suffix):
    return path.with_name(path.stem + suffix)


def _emit_json(cfg, obj):
    text = dump_json(obj)
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        write_atomic(cfg.output, text)


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(str(path), f"cannot read: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}", f"invalid JSON ({exc.msg}, column {exc.colno})") from None


# -- commands -----------------------------------------------------------------


def cmd_solve(cfg):
    problem = LpProblem.from_dict(_read_json(cfg.input))
    res = solve(problem, tol=cfg.tol, max_iter=cfg.max_iter, damping=cfg.damping)
    out = {"problem": problem.to_dict(), "tol": cfg.tol, "result": res.to_dict()}
    _emit_json(cfg, out)
    if cfg.output is not None:
        rows = [(i, *u.tolist(), float(f), float(h), float(r))
                for i, (u, f, h, r) in enumerate(zip(problem.normals, problem.targets,
                                                     res.h, res.residuals))]
        header = ["index"] + [f"u{k + 1}" for k in range(problem.dim)] + ["f", "h", "residual"]
        write_atomic(_sibling(cfg.output, ".residuals.csv"), format_csv(header, rows))
    log.info("converged=%s iterations=%d max|rho|=%.3e", res.converged, res.iterations,
             res.max_residual)
    if res.converged and np.any(np.abs(res.residuals) > cfg.tol):
        raise AssertionError("converged result violates the requested tolerance")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_verify(cfg):
    try:
        if cfg.example == "ex32":
            report, header, rows = _verify_ex32(cfg)
        else:
            report, header, rows = _verify_ex42(cfg)
    except ParameterError as exc:
        raise SchemaError("parameters", str(exc)) from None
    _emit_json(cfg, report)
    if cfg.output is not None:
        write_atomic(_sibling(cfg.output, ".sweep.csv"), format_csv(header, rows))
    return EXIT_OK


def _verify_ex32(cfg):
    params = Example32Params(cfg.n, cfg.p, cfg.beta)
    grid = cfg.grid or (200, 200)
    if len(grid) == 1:
        grid = grid * 2
    ver = ex32_verify(params, grid=grid)
    report = {
        "example": "ex32", "params": params.to_dict(), "grid": list(grid),
        "alpha": params.alpha, "beta_threshold": params.beta_threshold,
        "order": str(ver.order), "c1": ver.c1, "c2": ver.c2,
        "ratio": ver.c2 / ver.c1 if ver.c1 > 0 else None,
        "convex": ver.convex, "min_eigenvalue": ver.min_eigenvalue,
        "verified": bool(ver.convex and ver.c1 > 0 and np.isfinite(ver.c2)),
    }
    return report, ["x1", "r", "value", "det", "residual"], ver.rows


def _verify_ex42(cfg):
    params = Example42Params(cfg.n, cfg.p)
    zs = (1e-3, 1e-4, 1e-5, 1e-6)
    res, c = ex42_limit(params, zs)
    diffs = np.abs(np.diff(res)) / np.abs(res[1:])
    m = (cfg.grid or (100,))[0]
    sweep = []
    for z in np.geomspace(1e-6, 1.0, m):
        ev = ex42_eval(params, z)
        sweep.append((float(z), ev.value, ev.det, ev.residual))
    report = {
        "example": "ex42", "params": params.to_dict(), "q": params.q,
        "exponent": params.exponent, "coefficient": params.coefficient,
        "z": list(zs), "residuals": res.tolist(), "relative_differences": diffs.tolist(),
        "limit": c, "value_at_zero": float(ex42_value(params, 0.0)),
        "verified": bool(c > 0 and np.all(diffs < 1e-2) and ex42_value(params, 0.0) == 0.0),
    }
    return report, ["z", "value", "det", "residual"], sweep


def cmd_diagnose(cfg):
    data = _read_json(cfg.input)
    problem = None
    if isinstance(data, dict) and "polytope" in data:
        if "problem" in data:
            problem = LpProblem.from_dict(data["problem"])
        data = data["polytope"]
    P = Polytope.from_dict(data)
    try:
        rep = diagnose(P, cfg.p, problem)
        verdicts = theorem_verdicts(P, cfg.p)
    except DomainError as exc:
        raise SchemaError("polytope", str(exc)) from None
    out = rep.to_dict()
    out["p"] = cfg.p
    out["theorems"] = verdicts
    sys.stdout.write(rep.table() + "\n")
    if cfg.output is not None:
        write_atomic(cfg.output, dump_json(out))
    return EXIT_OK


def cmd_transfer(cfg):
    spec = _read_json(cfg.input) if cfg.input is not None else {}
    if not isinstance(spec, dict):
        raise SchemaError("$", "expected an object")
    n = cfg.n
    if n not in (2, 3):
        raise SchemaError("n", "must be 2 or 3")
    e = np.asarray(spec.get("e", [0.0] * (n - 1) + [-1.0]), dtype=float)
    if e.shape != (n,):
        raise SchemaError("e", f"expected {n} numbers")
    e = e / np.linalg.norm(e)
    dens = spec.get("density", {"name": "constant", "params": {"value": 1.0}})
    if not isinstance(dens, dict) or dens.get("name") != "constant":
        raise SchemaError("density.name", "only the 'constant' density is defined on the sphere")
    f = densities.make("constant", dens.get("params"))
    extent = float(spec.get("extent", 2.0))
    if not extent > 0:
        raise SchemaError("extent", "must be positive")
    m = cfg.grid[0]
    ticks = np.linspace(-extent, extent, m)
    B = tangent_basis(e)
    coords = ticks[:, None] if n == 2 else np.array([(a, b) for a in ticks for b in ticks])
    rows = []
    for y in coords:
        yy = y @ B
        rows.append((*[float(t) for t in y], transfer_density(f, cfg.p, e, yy)))
    header = [f"y{k + 1}" for k in range(n - 1)] + ["g"]
    text = format_csv(header, rows)
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        write_atomic(cfg.output, text)
    return EXIT_OK


def cmd_selftest(cfg):
    seeds = (cfg.seed,) if cfg.seed is not None else (0, 1, 2, 3, 4)
    checks, seconds = run_selftest(seeds)
    for c in checks:
        sys.stdout.write(c.line() + "\n")
    ok = all(c.passed for c in checks)
    sys.stdout.write(f"{sum(c.passed for c in checks)}/{len(checks)} passed in {seconds:.1f} s\n")
    if cfg.output is not None:
        write_atomic(cfg.output, dump_json({
            "seeds": list(seeds), "passed": ok,
            "checks": [{"name": c.name, "seed": c.seed, "passed": c.passed,
                        "worst": c.worst if np.isfinite(c.worst) else None,
                        "tolerance": c.tolerance} for c in checks]}))
    return EXIT_OK if ok else EXIT_INTERNAL


COMMANDS = {"solve": cmd_solve, "verify-example": cmd_verify, "diagnose": cmd_diagnose,
            "transfer": cmd_transfer, "selftest": cmd_selftest}


def run(cfg):
    return COMMANDS[cfg.command](cfg)


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        sys.stderr.write(f"lpmink: error: {exc}\n")
        return EXIT_INPUT
    try:
        return run(cfg)
    except LpMinkError as exc:
        sys.stderr.write(f"lpmink: input error: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        log.exception("internal failure")
        sys.stderr.write(f"lpmink: internal error: {exc}\n")
        return EXIT_INTERNAL
