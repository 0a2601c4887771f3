"""Named density functions.

Densities are chosen by name plus a parameter record; there is no
expression parser.  Planar densities map an (N, d) array of points to N
values, spherical ones map a unit vector to a value.
"""
from __future__ import annotations

import numpy as np

from .closed_forms import (Example32Params, Example42Params, ex32_hessian_at, ex32_value,
                           ex42_rhs)
from .errors import SchemaError

NAMES = ("constant", "example32_rhs", "example42_rhs")


def constant(value=1.0):
    value = float(value)
    if not value >= 0:
        raise SchemaError("density.value", "must be nonnegative")

    def g(x):
        x = np.asarray(x, dtype=float)
        return value if x.ndim == 1 else np.full(len(x), value)

    return g


def example32_rhs(n, p, beta):
    """v^(1-p) det D^2 v for the segment-vanishing function, on points of R^n."""
    params = Example32Params(int(n), float(p), float(beta))

    def g(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(len(x))
        for k, pt in enumerate(x):
            r = float(np.linalg.norm(pt[1:]))
            if r == 0.0:
                out[k] = np.nan
                continue
            det = np.linalg.det(ex32_hessian_at(params, pt))
            out[k] = float(ex32_value(params, pt[0], r)) ** (1 - params.p) * det
        return out

    return g


def example42_rhs(n, p):
    """v^(1-p) det D^2 v for the radial profile, on points of R^(n-1)."""
    params = Example42Params(int(n), float(p))
    return lambda y: ex42_rhs(params, y)


def make(name, params=None):
    """Build a density from its name and a parameter dict."""
    params = dict(params or {})
    factories = {"constant": constant, "example32_rhs": example32_rhs,
                 "example42_rhs": example42_rhs}
    if name not in factories:
        raise SchemaError("density.name", f"unknown density {name!r}; expected one of {NAMES}")
    try:
        return factories[name](**params)
    except TypeError as exc:
        raise SchemaError("density.params", str(exc)) from None
