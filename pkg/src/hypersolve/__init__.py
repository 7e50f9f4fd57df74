"""Affine-scaling interior point method for hyperbolic programs.

The polynomial is accessed through an evaluation oracle; barrier derivatives
and hyperbolic eigenvalue moments are recovered by interpolating univariate
restrictions at roots of unity.
"""

from .calculus import check_derivatives, derivatives, full_gradient, full_hessian, grad_dot, hess_vec
from .errors import (
    AssumptionError,
    CapabilityError,
    DegenerateDirectionError,
    HypersolveError,
    IndefiniteError,
    InitializationError,
    InputError,
    NotHyperbolicError,
    NumericalFailure,
    SingularityError,
    StepFailure,
)
from .ipm import SolveReport, contraction_audit, iteration_bound, kappa, solve, step_quadratic
from .options import SolverOptions
from .polynomials import (
    HyperbolicPolynomial,
    PolynomialSpec,
    determinant_polynomial,
    hyperbolicity_probe,
    lorentz_polynomial,
    pencil_polynomial,
    product_polynomial,
    sparse_monomial_polynomial,
)
from .problems import HyperbolicProgram, from_lp, from_sdp, from_socp, load, save, validate
from .qp import QpProblem, solve_qp
from .univariate import eigenvalues, min_eigenvalue, moments, restrict

__version__ = "0.1.0"
