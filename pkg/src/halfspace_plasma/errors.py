"""Exception hierarchy shared by all modules."""


class PlasmaError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PlasmaError, ValueError):
    """An input parameter violates its documented domain."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class EndpointError(PlasmaError, ValueError):
    """Evaluation requested at (or too close to) a logarithmic endpoint."""


class CutError(PlasmaError, ValueError):
    """Off-cut formula evaluated on its branch cut."""


class ResonanceError(PlasmaError, ArithmeticError):
    """A boundary value of the dispersion function (nearly) vanishes."""


class NearLError(PlasmaError):
    """Parameters lie in the band around the curve L where the mode count is ill-conditioned."""


class ConvergenceError(PlasmaError, ArithmeticError):
    """An iterative method failed to reach its tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class QuadratureError(ConvergenceError):
    """Adaptive quadrature exceeded its depth budget."""


class ContourError(PlasmaError, ArithmeticError):
    """Argument-principle contour passes too close to a zero or gives a non-integer count."""


class ResidualError(PlasmaError):
    """A solved instance fails its defining equations."""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals
