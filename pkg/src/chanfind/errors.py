"""Exception hierarchy shared by every chanfind module."""
from __future__ import annotations


class ChanfindError(Exception):
    """Base class for all errors raised by chanfind."""


# channel database

class ParseError(ChanfindError):
    pass


class SchemaError(ChanfindError):
    pass


class DuplicateAddress(ChanfindError):
    pass


class RangeError(ChanfindError):
    pass


class EmptyList(ChanfindError):
    pass


class MissingLevel(ChanfindError):
    pass


class UnknownPrefix(ChanfindError):
    pass


# selector

class BudgetExhausted(ChanfindError):
    pass


class BackendUnavailable(ChanfindError):
    pass


class TransportError(BackendUnavailable):
    pass


class AuthError(ChanfindError):
    pass


class InvalidAfterRetry(ChanfindError):
    pass


class SchemaViolationAfterRetry(ChanfindError):
    pass


# finders

class DatabaseTooLarge(ChanfindError):
    pass


class EmptyDescription(ChanfindError):
    pass


class DeadEnd(ChanfindError):
    pass


class IterationLimitExceeded(ChanfindError):
    pass


class UnknownComponent(ChanfindError):
    pass


class EmptyHints(ChanfindError):
    pass


class UnknownTool(ChanfindError):
    pass


class UnknownSystem(ChanfindError):
    pass


class UnknownFamily(ChanfindError):
    pass


class UnknownField(ChanfindError):
    pass


# ontology

class UnmappedFamily(ChanfindError):
    pass


class QuerySyntaxError(ChanfindError):
    """Malformed graph query; ``position`` is the character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NoTemplateMatch(ChanfindError):
    pass


class CycleDetected(UserWarning):
    """Issued (not raised) when a hierarchy predicate contains a cycle."""


class UnknownPredicate(UserWarning):
    pass


# bench

class ConfigError(ChanfindError):
    pass
