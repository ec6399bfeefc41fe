"""Numerical verification of weighted L2 inequalities for pseudodifferential operators on the torus."""

__version__ = "0.1.0"

from .grid import Field, Grid, GridError, Spectrum, inverse, make_grid, transform, weighted_l2  # noqa: E402
from .maximal import Weight, hl_maximal, make_weight, nontangential_fractional, smooth_majorant  # noqa: E402
from .operators import PseudoDifferentialOperator, apply_pdo, apply_pdo_adjoint, pdo_kernel  # noqa: E402
from .reports import InequalityReport, ReportSet  # noqa: E402
from .symbols import ClassParams, Symbol, make_builtin_symbol, symbol_from_spec  # noqa: E402

__all__ = [
    "__version__", "Field", "Grid", "GridError", "Spectrum", "inverse", "make_grid", "transform", "weighted_l2",
    "Weight", "hl_maximal", "make_weight", "nontangential_fractional", "smooth_majorant",
    "PseudoDifferentialOperator", "apply_pdo", "apply_pdo_adjoint", "pdo_kernel",
    "InequalityReport", "ReportSet", "ClassParams", "Symbol", "make_builtin_symbol", "symbol_from_spec",
]
