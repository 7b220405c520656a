"""Green's functions for fractional differential operators with variable coefficients.

The symbolic path (:mod:`fracgreen.neumann_engine` on top of
:mod:`fracgreen.power_algebra`) sums Neumann series exactly for polynomial
coefficients. The grid path (:mod:`fracgreen.numeric_path`) handles general
continuous coefficients. :mod:`fracgreen.verifier` checks either kind of
result against the equation and its initial conditions.
"""

from fracgreen.exceptions import (
    ConvergenceError,
    DomainError,
    FracGreenError,
    PoleError,
    SpecParseError,
    SpecValidationError,
    TermOverflowError,
    TruncationError,
)
from fracgreen.neumann_engine import (
    MultiIndex,
    OperatorSpec,
    Sampled,
    TruncationPolicy,
    apply_operator,
    constant_coeff_green,
    constant_coeff_solution,
    constant_coeff_solution_ml,
    green_section,
    greens_function,
    greens_increments,
    homogeneous_increments,
    homogeneous_solution,
    inhomogeneous_increments,
    inhomogeneous_solution,
    majorant_bound,
)
from fracgreen.numeric_path import (
    GradedGrid,
    GridFunction,
    convolve_green,
    convolve_green_series,
    default_grading,
    frac_derivative_grid,
    frac_integral_grid,
    green_on_grid,
    solve_inhomogeneous_grid,
    successive_approximation,
)
from fracgreen.power_algebra import (
    BivariatePowerSeries,
    GeneralizedPowerSeries,
    bi_poly_multiply,
    bi_rl_integral,
    evaluate,
    format_series,
    parse_series,
    poly_multiply,
    rl_derivative,
    rl_integral,
)
from fracgreen.problem_spec import ProblemSpec, parse_spec, render
from fracgreen.special_functions import (
    MLParams,
    gamma,
    gamma_ratio,
    ml_multivariate,
    ml_two_param,
    ml_two_param_deriv,
)
from fracgreen.verifier import VerificationReport, verify_green, verify_solution

__all__ = [
    "BivariatePowerSeries",
    "ConvergenceError",
    "DomainError",
    "FracGreenError",
    "GeneralizedPowerSeries",
    "GradedGrid",
    "GridFunction",
    "MLParams",
    "MultiIndex",
    "OperatorSpec",
    "PoleError",
    "ProblemSpec",
    "Sampled",
    "SpecParseError",
    "SpecValidationError",
    "TermOverflowError",
    "TruncationError",
    "TruncationPolicy",
    "VerificationReport",
    "apply_operator",
    "bi_poly_multiply",
    "bi_rl_integral",
    "constant_coeff_green",
    "constant_coeff_solution",
    "constant_coeff_solution_ml",
    "convolve_green",
    "convolve_green_series",
    "default_grading",
    "evaluate",
    "format_series",
    "frac_derivative_grid",
    "frac_integral_grid",
    "gamma",
    "gamma_ratio",
    "green_on_grid",
    "green_section",
    "greens_function",
    "greens_increments",
    "homogeneous_increments",
    "homogeneous_solution",
    "inhomogeneous_increments",
    "inhomogeneous_solution",
    "majorant_bound",
    "ml_multivariate",
    "ml_two_param",
    "ml_two_param_deriv",
    "parse_series",
    "parse_spec",
    "poly_multiply",
    "render",
    "rl_derivative",
    "rl_integral",
    "solve_inhomogeneous_grid",
    "successive_approximation",
    "verify_green",
    "verify_solution",
]
