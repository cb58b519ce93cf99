"""Exception hierarchy shared by every qwalk module."""


class QWalkError(Exception):
    """Base class for all library errors."""


class DomainError(QWalkError, ValueError):
    """An argument lies outside the operation's domain (bad index, length, range)."""


class ValidationError(QWalkError, ValueError):
    """An object fails a structural check (non-unitary gate, bad distribution)."""


class FormatError(QWalkError, ValueError):
    """Input file content cannot be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
