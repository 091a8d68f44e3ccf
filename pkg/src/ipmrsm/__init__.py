"""Response-surface designs and inverse polynomial regression.

Designs (factorial, central composite) with orthogonality, rotatability and
uniform-precision checks; inverse polynomial models fitted by Gauss-Newton;
bootstrap and linearisation intervals; Shapiro-Wilk residual diagnostics.
"""

__version__ = "0.1.0"

from .bootstrap import BootstrapResult, bootstrap_fit, percentile_ci, resample_cases
from .dataset import Dataset, ingest_csv
from .design import (
    Design,
    DesignMoments,
    PropertyReport,
    ccd,
    check_orthogonality,
    check_rotatability,
    check_uniform_precision,
    design_moments,
    full_factorial,
)
from .diagnostics import adequacy_report, residuals, shapiro_wilk, standardized_residuals
from .estimators import InversePolynomialRegressor, MonomialFeatures
from .exceptions import (
    ConvergenceError,
    InputError,
    RankDeficiencyError,
    RSMError,
    SingularityError,
)
from .linear import LinearFit, coef_covariance, ols_fit, prediction_variance, variance_surface_grid
from .model import (
    ParamVector,
    eval_linear_predictor,
    eval_response,
    ipm_first_order,
    ipm_second_order,
    jacobian,
    reciprocal_ols_start,
)
from .solver import (
    FitResult,
    SolverConfig,
    asymptotic_ci,
    convergence_check,
    gauss_newton,
    refit_from_solution,
    sse,
)
from .terms import ModelSpec, Term, model_matrix, polynomial_model
