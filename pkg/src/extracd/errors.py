"""Exception types shared across the package."""

__all__ = ["ArgumentError", "ParseError", "NumericalError"]


class ArgumentError(ValueError):
    """Raised when a caller passes arguments violating a documented precondition."""


class ParseError(ValueError):
    """Raised on malformed input files; the message carries a 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot produce a trustworthy result."""
