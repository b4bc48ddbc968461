"""
Custom error classes for ipmhull
"""
from typing import Any
from typing import Optional


class MessageError(RuntimeError):
    pass


class PreconditionError(MessageError):
    """
    An operation was called with arguments that break its pre-condition.

    The optional details carry whatever the caller needs to report the
    failure, for example the offending frame indices or separator values.
    """
    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message)
        self.details = details


class InvalidWaveDirectionError(PreconditionError):
    pass


class MalformedTreeError(MessageError):
    pass


class FieldError(MessageError):
    pass


class ConfigError(MessageError):
    pass
