"""Discrete L_p Minkowski problem for p < 1, with regularity diagnostics."""
from .convex import (Cone, DiscreteMeasure, Polytope, box, face, lp_area_measure, normal_cone,
                     regular_polygon, support, surface_area_measure)
from .diagnostics import RegularityReport, Verdict, diagnose, lemma51_assert, theorem_verdicts
from .errors import (DomainError, LpMinkError, MeshingError, ParameterError, ProblemError,
                     SchemaError, SingularityError, UnsupportedExponentError)
from .monge_ampere import (PLConvexFunction, check_alexandrov, ma_measure, radial_jacobian,
                           restrict_support, subgradient, transfer_density)
from .solver import UNSUPPORTED, LpProblem, SolveResult, oracle_small, residual, solve

__version__ = "0.1.0"
