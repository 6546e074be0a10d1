"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(RuntimeError):
    """A computation would exceed its configured budget."""


class ProtocolError(RuntimeError):
    """A piece made an illegal move during play."""


class FormatError(ValueError):
    """A text file does not follow the expected grammar."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
