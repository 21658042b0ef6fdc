"""Exception and warning types raised across the package."""


class ResmixError(Exception):
    """Base class for all package errors."""


class ParameterError(ResmixError, ValueError):
    """A medium or boundary parameter violates its invariant."""

    def __init__(self, field, value, message=None):
        self.field = field
        self.value = value
        super().__init__(message or f"invalid value for {field!r}: {value!r}")


class NonPositiveCoupling(ParameterError):
    pass


class NegativeFlux(ParameterError):
    pass


class ResonanceViolation(ResmixError, ValueError):
    pass


class DomainError(ResmixError, ValueError):
    pass


class SingularCharacteristic(DomainError):
    pass


class BranchAmbiguity(ResmixError, ArithmeticError):
    pass


class VanishingA0(ResmixError, ArithmeticError):
    pass


class NoOscillationRegime(ResmixError, ArithmeticError):
    pass


class NonMonotoneRelation(ResmixError, ArithmeticError):
    pass


class ConditionViolated(ResmixError, ValueError):
    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class MuOrdering(ResmixError, ValueError):
    pass


class NoSolution(ResmixError, ValueError):
    pass


class GridMismatch(ResmixError, ValueError):
    pass


class StiffnessFailure(ResmixError, RuntimeError):
    pass


class BranchLoss(ResmixError, RuntimeError):
    pass


class NonConvergence(ResmixError, RuntimeError):
    pass


class RegimeWarning(UserWarning):
    """A regime validity condition is violated; results may be inaccurate."""
