"""Exception types and source spans shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


class SalError(Exception):
    """Base class for all errors raised by this package."""


class CycleError(SalError):
    """An order relation relates two distinct elements in both directions."""


class UndeclaredIdentifier(SalError):
    """A world, index, or atom is used without being declared."""


class FrameViolation(SalError):
    """A strict policy refused a model that fails frame validation."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        first = self.violations[0].render() if self.violations else ""
        super().__init__(
            f"{len(self.violations)} frame violation(s), first: {first}"
        )


class IllegalTagForProfile(SalError):
    """An axiom tag was used under a profile that does not include it."""


class BoundsTooLarge(SalError):
    """The bounded search space exceeds the configured ceiling."""


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets [start, end) into the input text."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"malformed span ({self.start}, {self.end})")


class ParseError(SalError):
    """Malformed concrete syntax.

    Carries the byte span of the offending region and, when known, the
    set of token descriptions that would have been accepted there.
    """

    def __init__(self, message, span, expected=()):
        self.span = span
        self.expected = frozenset(expected)
        tail = f" (expected {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at bytes {span.start}..{span.end}{tail}")


class ForwardReference(SalError):
    """A proof line cites itself, a later line, or a nonexistent line."""
