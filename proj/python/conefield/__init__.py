"""Cone-field calculus on truncated domains and the L2 metric on Riemannian metrics."""

from ._conefield import *  # noqa: F401,F403
from ._conefield import ConefieldError, Grid, GridConfig

__all__ = [
    "ConefieldError",
    "Grid",
    "GridConfig",
    "bound",
    "builtin",
    "classify",
    "ebin",
    "evaluate",
    "expr_field",
    "norm",
    "parse_field_spec",
    "pencil_radius",
    "pullback",
    "run_cli",
    "run_suite",
    "suite_names",
    "volume",
]
