"""Exception hierarchy shared by every quasiwave module."""

from __future__ import annotations


class QuasiwaveError(Exception):
    """Base class for all library errors."""


class ExpressionSyntaxError(QuasiwaveError, ValueError):
    """Malformed speed expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} (at byte {offset})")


class UnknownIdentifier(ExpressionSyntaxError):
    def __init__(self, name: str, offset: int, text: str = ""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, text)


class ExpressionEvalError(QuasiwaveError, ArithmeticError):
    """Division by zero or log of a non-positive value while evaluating an AST."""


class DomainError(QuasiwaveError, ValueError):
    """A parameter lies outside its admissible range."""


class DegeneracyError(QuasiwaveError, ValueError):
    """The wave speed was requested at or below the degeneracy point theta0."""


class QuadratureError(QuasiwaveError, ArithmeticError):
    pass


class FitError(QuasiwaveError, ValueError):
    pass


class OutOfDomain(QuasiwaveError, ValueError):
    pass


class SolverStop(QuasiwaveError, RuntimeError):
    """A time step tripped a stop threshold. The sealed state rides along."""

    def __init__(self, message: str, state, stats=None, *, degenerate: bool = False,
                 blowup: bool = False):
        super().__init__(message)
        self.state = state
        self.stats = stats
        self.degenerate = degenerate
        self.blowup = blowup


class DegeneracyStop(SolverStop):
    def __init__(self, message: str, state=None, stats=None, *, blowup: bool = False):
        super().__init__(message, state, stats, degenerate=True, blowup=blowup)


class BlowupStop(SolverStop):
    def __init__(self, message: str, state=None, stats=None):
        super().__init__(message, state, stats, blowup=True)


class ConfigError(QuasiwaveError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{message} [{location}]" if location else message)


class ValidationError(ConfigError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
