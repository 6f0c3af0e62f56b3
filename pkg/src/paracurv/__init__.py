"""Curvature of almost paracontact metric 3-manifolds, checked numerically."""

__version__ = "0.1.0"

from .exprcore import Chart, Expression, diff, equal_numeric, evaluate, parse, render, simplify  # noqa: E402
from .chartcalc import (  # noqa: E402
    CurvatureCache,
    MetricField,
    TensorField,
    VectorField,
    curvature_cache,
)
from .paracontact import ParacontactStructure, alpha_beta, check_axioms, classify  # noqa: E402

__all__ = [
    "Chart",
    "Expression",
    "diff",
    "equal_numeric",
    "evaluate",
    "parse",
    "render",
    "simplify",
    "CurvatureCache",
    "MetricField",
    "TensorField",
    "VectorField",
    "curvature_cache",
    "ParacontactStructure",
    "alpha_beta",
    "check_axioms",
    "classify",
]
