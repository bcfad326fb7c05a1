"""Exception hierarchy shared by every module of the package."""


class DensityMetricsError(Exception):
    """Base class for all errors raised by :mod:`densitymetrics`."""


class ShapeMismatchError(DensityMetricsError, ValueError):
    """Operands live in different algebras, or blocks do not match the shape."""


class DomainError(DensityMetricsError, ValueError):
    """Input lies outside the domain of an operation.

    ``certificate`` carries the offending quantity (a minimum eigenvalue,
    a Hermitian defect, ...) when one is available.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class DegenerateInputError(DensityMetricsError, ValueError):
    """Input is structurally valid but degenerate (e.g. zero trace)."""


class ConvergenceError(DensityMetricsError, RuntimeError):
    """An iterative routine exhausted its iteration budget."""


class NumericalConsistencyError(DensityMetricsError, ArithmeticError):
    """A computed quantity left its mathematically allowed range."""


class SeminormKernelError(DensityMetricsError, ValueError):
    """Seminorm does not vanish exactly on the constants."""


class UnboundedProblemError(DensityMetricsError, ArithmeticError):
    """A linear program has an unbounded objective."""


class ResampleRequired(DensityMetricsError):
    """A randomly drawn probe left the positive cone and must be redrawn."""
