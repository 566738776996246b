"""
Custom exceptions for the bang-bang fiber toolkit.
"""


class BBFiberError(Exception):
    """Base exception for all toolkit errors."""

    pass


class FockSpaceError(BBFiberError):
    """Raised when a Fock space is invalid or a mode index is out of range."""

    pass


class OperatorError(BBFiberError):
    """Raised when operator construction or algebra fails."""

    pass


class StateError(BBFiberError):
    """Raised when a state violates its normalization or variant requirements."""

    pass


class SequenceError(BBFiberError):
    """Raised when a control sequence is malformed."""

    pass


class ParseError(BBFiberError):
    """Raised when a sequence or term literal cannot be parsed."""

    pass


class ModelError(BBFiberError):
    """Raised when a fiber model is invalid or a build-time check fails."""

    pass


class PropagationError(BBFiberError):
    """Raised when a propagation run cannot be carried out."""

    pass


class BoundError(BBFiberError):
    """Raised when a decoherence-bound query is singular or out of range."""

    pass


class ConfigError(BBFiberError):
    """Raised when a run configuration is invalid."""

    pass


class StorageError(BBFiberError):
    """Raised when storage operations fail."""

    pass
