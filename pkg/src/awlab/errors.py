"""Exception hierarchy shared by every awlab module."""

from __future__ import annotations


class AWLabError(Exception):
    """Base class for all awlab failures."""


class OutOfValidity(AWLabError, ValueError):
    pass


class NonConvergence(AWLabError, ArithmeticError):
    pass


class IllConditioned(AWLabError, ArithmeticError):
    pass


class ResidualError(AWLabError, ArithmeticError):
    """A fitted object fails to reproduce its input data."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class PoleHit(AWLabError, ZeroDivisionError):
    pass


class DerivativeUnavailable(AWLabError):
    pass


class DegreeMismatch(AWLabError, ArithmeticError):
    pass


class DepthExceeded(AWLabError, ValueError):
    pass


class QuadratureFailure(AWLabError, ArithmeticError):
    pass


class Unsupported(AWLabError, TypeError):
    pass


class NotEntire(AWLabError, ValueError):
    pass


class BelowR0(AWLabError, ValueError):
    pass


class EmpiricalUnstable(AWLabError, ArithmeticError):
    pass


class InsufficientData(AWLabError, ValueError):
    pass


class DegenerateT(AWLabError, ValueError):
    pass


class AlphaZero(AWLabError, ValueError):
    pass


class PreconditionRadius(AWLabError, ValueError):
    pass


class SingularHit(AWLabError, ArithmeticError):
    pass


class InvalidInput(AWLabError, ValueError):
    pass


class HypothesisViolation(AWLabError, ValueError):
    pass


class SolutionDegenerate(AWLabError, ValueError):
    pass


class ParseError(AWLabError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class ValidationError(AWLabError, ValueError):
    """Carries every failed invariant, not only the first one."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)
