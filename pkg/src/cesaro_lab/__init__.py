"""Numerical laboratory for the Cesàro operator on growth spaces of the disc."""

from cesaro_lab.analytic import (
    ONE,
    PHI,
    ZERO,
    Atom,
    AtomSum,
    CoefficientBudgetExceeded,
    FunctionModel,
    GeneratorSeries,
    coefficients,
    combine,
    differentiate,
    evaluate,
    integrate,
)
from cesaro_lab.expr import parse_expression, to_expression
from cesaro_lab.norms import (
    GridOptions,
    NormEstimate,
    boundary_profile,
    classify_membership,
    monomial_norm,
    weighted_sup_norm,
)
from cesaro_lab.operator import (
    apply_cesaro,
    apply_inverse_cesaro,
    cesaro_mean,
    cesaro_power,
    solve_identity_minus_C,
    solve_lambda_resolvent,
    theoretical_norm_bound,
)

__version__ = "0.1.0"

__all__ = [
    "ONE", "PHI", "ZERO", "Atom", "AtomSum", "CoefficientBudgetExceeded", "FunctionModel",
    "GeneratorSeries", "coefficients", "combine", "differentiate", "evaluate", "integrate",
    "parse_expression", "to_expression",
    "GridOptions", "NormEstimate", "boundary_profile", "classify_membership", "monomial_norm",
    "weighted_sup_norm",
    "apply_cesaro", "apply_inverse_cesaro", "cesaro_mean", "cesaro_power",
    "solve_identity_minus_C", "solve_lambda_resolvent", "theoretical_norm_bound",
]
