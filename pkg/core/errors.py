# ./fcl/core/errors.py

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Sequence


# --- Source Positions ---
@dataclass(frozen=True)
class SourceSpan:
    """1-based position range of a token inside an input file."""
    file: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError(f"SourceSpan is 1-based, got {self.line}:{self.column}")
        if (self.end_line, self.end_column) < (self.line, self.column):
            raise ValueError("SourceSpan end precedes its start")

    @classmethod
    def token(cls, file: str, line: int, column: int, text: str) -> 'SourceSpan':
        # Single-line token; an empty token still covers one column
        return cls(file, line, column, line, column + max(len(text), 1) - 1)

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


# --- Base ---
class FclError(Exception):
    """Root of every error raised by the toolkit."""

    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def with_span(self, span: Optional[SourceSpan]) -> 'FclError':
        if self.span is None:
            self.span = span
        return self

    def __str__(self) -> str:
        return f"{self.span}: {self.message}" if self.span else self.message


class ParseError(FclError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None, expected: Sequence[str] = ()):
        if not message:
            message = "syntax error"
        super().__init__(message, span)
        self.expected = sorted(expected)

    def __str__(self) -> str:
        text = super().__str__()
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        return text


# --- Invariant Violations ---
class ValidationError(FclError):
    pass


class InvalidIdentifier(ValidationError):
    pass


class SelfCommunication(ValidationError):
    def __init__(self, participant: Any, span: Optional[SourceSpan] = None):
        super().__init__(f"participant {participant} cannot communicate with itself", span)
        self.participant = participant


class DeterminismViolation(ValidationError):
    def __init__(self, state: str, label: Any, span: Optional[SourceSpan] = None):
        super().__init__(f"state {state} has more than one transition labelled {label}", span)
        self.state = state
        self.label = label


class NonDeterministicMachine(ValidationError):
    def __init__(self, owner: Any, state: str, label: Any, span: Optional[SourceSpan] = None):
        shown = 'eps' if label is None else label
        super().__init__(f"machine {owner} is not deterministic at state {state} on {shown}", span)
        self.owner = owner
        self.state = state
        self.label = label


class NonLocalAction(ValidationError):
    def __init__(self, owner: Any, action: Any, span: Optional[SourceSpan] = None):
        super().__init__(f"action {action} is not local to {owner}", span)
        self.owner = owner
        self.action = action


class UnknownParticipant(ValidationError):
    def __init__(self, participant: Any, span: Optional[SourceSpan] = None):
        super().__init__(f"participant {participant} has no local behaviour in the system", span)
        self.participant = participant


class NonAntichain(ValidationError):
    def __init__(self, first: Any, second: Any, span: Optional[SourceSpan] = None,
                 other_span: Optional[SourceSpan] = None):
        super().__init__(f"generator {first} is a prefix of generator {second}", span)
        self.first = first
        self.second = second
        self.other_span = other_span


class DegenerateParticipant(ValidationError):
    def __init__(self, participant: Any, span: Optional[SourceSpan] = None):
        super().__init__(f"the local language of {participant} contains only the empty word", span)
        self.participant = participant


class DuplicateLabel(ValidationError):
    def __init__(self, label: Any, span: Optional[SourceSpan] = None):
        super().__init__(f"branch label {label} occurs more than once", span)
        self.label = label


class UnguardedRecursion(ValidationError):
    def __init__(self, var: str, span: Optional[SourceSpan] = None):
        super().__init__(f"recursion variable {var} occurs unguarded", span)
        self.var = var


class UnboundVariable(ValidationError):
    def __init__(self, var: str, span: Optional[SourceSpan] = None):
        super().__init__(f"recursion variable {var} is not bound", span)
        self.var = var


# --- Exploration Limits ---
class StateBudgetExceeded(FclError):
    def __init__(self, budget: int, what: str = "states"):
        super().__init__(f"exploration exceeded the budget of {budget} {what}")
        self.budget = budget


class InfiniteAntichain(StateBudgetExceeded):
    """The maximal words of a language are infinitely many and no bound was given."""

    def __init__(self, detail: str):
        FclError.__init__(self, f"maximal words are not finitely generated: {detail}")
        self.budget = None


# --- Global Types ---
class UndefinedReason(str, Enum):
    MERGE_CLASH = "MergeClash"
    MIXED_DIRECTIONS = "MixedDirections"
    UNBOUNDED_DEPTH = "UnboundedDepth"


class ProjectionUndefined(FclError):
    def __init__(self, participant: Any, reason: UndefinedReason, detail: str = ""):
        text = f"projection on {participant} is undefined ({reason.value})"
        if detail:
            text += f": {detail}"
        super().__init__(text)
        self.participant = participant
        self.reason = reason


# --- Realisation ---
class CompletenessViolation(FclError):
    def __init__(self, word: Any):
        super().__init__(f"accepted word {word} is missing from the projected semantics")
        self.word = word
