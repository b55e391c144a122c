"""Localization, counting, and certification of nonlinear eigenvalue problems.

Eigenvalues of an analytic matrix-valued function T(z) are the zeros of
det T.  This package localizes them with generalized Gershgorin regions and
pseudospectra on complex grids, counts them with winding-number
certificates, compares them against linearizations (colleague matrices,
rational pencils), and polishes estimates with bordered Newton iteration.
"""

from . import (
    cheb_linearize,
    counting,
    errors,
    linear_compare,
    matfun,
    problems,
    refine,
    region_grid,
    special_functions,
)
from .matfun import Domain, MatFun, ScalarTerm, SplitMatFun, parse_problem

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "MatFun",
    "ScalarTerm",
    "SplitMatFun",
    "parse_problem",
    "matfun",
    "region_grid",
    "counting",
    "linear_compare",
    "cheb_linearize",
    "special_functions",
    "refine",
    "problems",
    "errors",
    "__version__",
]
