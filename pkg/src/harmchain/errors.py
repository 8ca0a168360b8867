class HarmChainError(Exception):
    pass


class ValidationError(HarmChainError, ValueError):
    """Malformed input: bad indices, overlapping groups, bad config."""


class NumericalError(HarmChainError, ArithmeticError):
    pass


class DomainError(NumericalError):
    """A scalar function was evaluated outside its domain."""


class UnstableChainError(NumericalError):
    """Potential matrix is not positive definite."""


class ConvergenceError(NumericalError):
    pass
