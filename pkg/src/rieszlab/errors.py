"""Exception hierarchy. The CLI maps ``ValidationError`` to exit code 2 and
every ``NumericalError`` to exit code 3."""


class RieszLabError(Exception):
    pass


class ValidationError(RieszLabError, ValueError):
    pass


class DomainError(ValidationError):
    pass


class ParameterError(ValidationError):
    pass


class NumericalError(RieszLabError, ArithmeticError):
    stage = "numerics"


class QuadratureError(NumericalError):
    stage = "quadrature"


class RootFindingError(NumericalError):
    stage = "root-finding"


class ConvergenceError(NumericalError):
    """Dense eigensolver failed; ``index`` is the unconverged position."""

    stage = "eigensolver"

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class SingularError(NumericalError):
    stage = "singular"


class DegenerateError(NumericalError):
    stage = "degenerate"


class NotFoundError(NumericalError):
    stage = "enclosure"
