"""Bures, C*-norm and Monge-Kantorovich metrics on density spaces of finite-dimensional C*-algebras."""

from .algebra import (
    AlgebraShape,
    DensityElement,
    Element,
    PositivityCertificate,
    Trace,
    check_positive,
    cstar_distance,
    cstar_norm,
    density_from_vector,
    normalize_to_density,
    sample_density,
    tau_norm,
    trace_eval,
)
from .calculus import matrix_abs, matrix_function, matrix_sqrt
from .eigen import EigenDecomposition, hermitian_eig, jacobi_svd
from .exceptions import (
    ConvergenceError,
    DegenerateInputError,
    DensityMetricsError,
    DomainError,
    NumericalConsistencyError,
    ResampleRequired,
    SeminormKernelError,
    ShapeMismatchError,
    UnboundedProblemError,
)
from .functions import (
    PiecewiseFunction,
    bures_distance_functions,
    fineness_closed_form,
    lebesgue_trace,
    make_fn,
    strict_fineness_table,
    uniform_norm_distance,
)
from .metrics import (
    RootCache,
    Seminorm,
    StateFunctional,
    bures_commutative_closed_form,
    bures_distance,
    bures_via_fidelity,
    fidelity_2x2_oracle,
    mk_distance_bruteforce,
    mk_distance_lp,
    quantum_distance,
    state_map,
)
from .quadrature import QuadratureSpec, integrate
from .simplex import simplex_max
from .suites import convergence_transfer_probe, metric_axiom_suite, metric_axiom_suites

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
