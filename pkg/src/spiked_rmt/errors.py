"""Exception hierarchy shared by all modules."""


class SpikedRMTError(Exception):
    """Base class for library errors."""


class ValidationError(SpikedRMTError, ValueError):
    """Invalid input (bad parameters, confluent spikes, ...)."""


class DomainError(ValidationError):
    pass


class InvalidInterval(ValidationError):
    pass


class NonConfining(ValidationError):
    pass


class ConfluentAlphas(ValidationError):
    pass


class CaseOutOfRange(ValidationError):
    pass


class ZeroExponent(ValidationError):
    pass


class BadScale(ValidationError):
    pass


class WindowTooSmall(ValidationError):
    pass


class NumericalError(SpikedRMTError, ArithmeticError):
    """A computation failed to reach its accuracy or stability target."""


class MultiCut(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NonConvergence(NoConvergence):
    """MCMC chains failed the between/within variance diagnostic."""


class SearchBoundsExceeded(NumericalError):
    pass


class FlatMaximum(NumericalError):
    pass


class PoleTooClose(NumericalError):
    pass


class Divergence(NumericalError):
    pass


class SingularOperator(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


class UnderflowRange(NumericalError):
    pass


class LossOfOrthogonality(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class IllConditionedB(NumericalError):
    pass


class HypothesisViolated(NumericalError):
    pass


class SingularGammaMatrix(NumericalError):
    pass
