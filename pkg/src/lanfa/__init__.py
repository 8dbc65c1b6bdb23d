"""Lanczos approximations of f(A)b and b^T f(A) b with contour-integral error bounds."""

from .errors import (
    DomainError,
    EnclosureError,
    LanfaError,
    MatrixMarketError,
    SingularIntegrandError,
    SingularShiftError,
    ValidationError,
)
from .linalg import (
    EighResult,
    Norm,
    SymmetricOperator,
    Tridiagonal,
    dense_sym_eigh,
    det_ratio,
    read_matrix_market,
    tridiag_eigvals,
    weighted_norm,
    write_matrix_market,
)
from .functions import ScalarFunction, parse_function
from .lanczos import LanczosFactorization, lanczos, recurrence_residual
from .fa import ShiftedSolveRecord, ground_truth, lanczos_fa, quadform, shifted_err_res
from .contours import (
    Contour,
    IntervalSet,
    SpectrumSets,
    contour_integral,
    h_norm_interval,
    h_norm_sets,
    hz_norm_interval,
    make_circle,
    make_double_circle,
    make_pacman,
    region_membership,
    split_interval_at,
)
from .linsys import (
    cg_apriori_bound,
    galerkin_from_minres,
    indefinite_iteration_bound,
    minres_residual_norms,
)
from .bounds import (
    BoundReport,
    bound_curve,
    bound_disk,
    bound_quadform,
    bound_xq_relative,
    default_setup,
    fp_correction,
    integral_term,
    quadform_bound_curve,
    rational_discretization_report,
    sqrt_pacman_constant,
    table1_constant,
    double_circle_factor,
    uniform_poly_bound,
)
from .problems import ProblemSpec, gen_outlier, gen_rhs, gen_strakos, gen_uniform, gen_wishart

__version__ = "0.1.0"
