"""Exception hierarchy shared by the library and the CLI.

The CLI turns any ``GfdError`` into ``ERROR: <message>`` on stderr and exit
status 2.
"""
from typing import Optional


class GfdError(Exception):
    """Root of every error raised by gfdcalc."""


class GfdDomainError(GfdError, ValueError):
    """An argument lies outside the domain of the operator (alpha, beta, t, k ...)."""


class GfdInputError(GfdError, ValueError):
    """An operation precondition does not hold for otherwise valid arguments."""


class GfdDivisionError(GfdError, ZeroDivisionError):
    """Denominator function vanishes at the evaluation point."""


class SearchFailureError(GfdError, RuntimeError):
    """A root search found no bracketing sign change."""


class DivergenceError(GfdError, ArithmeticError):
    """Integration produced a non-finite state.

    ``last_x`` is the last abscissa with a finite solution value.
    """

    def __init__(self, message: str, last_x: Optional[float] = None):
        super().__init__(message)
        self.last_x = last_x


class PropagationError(GfdError, ArithmeticError):
    """A sampled integrand value was not finite."""


class OutputError(GfdError, OSError):
    """Writing a result file failed."""

    def __init__(self, message: str, path=None):
        super().__init__(message)
        self.path = path

    def __str__(self) -> str:
        base = super().__str__()
        return f"{base} (path: {self.path})" if self.path is not None else base
