# ./fcl/core/words.py

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from functools import singledispatch, total_ordering
from typing import FrozenSet, Generic, Iterable, Iterator, Optional, Tuple, TypeVar, Union

from core.errors import InvalidIdentifier, SelfCommunication

logger = logging.getLogger('fcl.core.words')

IDENTIFIER = re.compile(r'[A-Za-z][A-Za-z0-9_]*\Z')
EMPTY_WORD_TEXT = 'eps'
SYMBOL_SEPARATOR = ' . '


def _check_identifier(kind: str, name: str):
    if not isinstance(name, str) or not IDENTIFIER.match(name):
        raise InvalidIdentifier(f"invalid {kind} name {name!r}")


# --- Alphabets ---
@dataclass(frozen=True, order=True)
class Participant:
    name: str

    def __post_init__(self):
        _check_identifier('participant', self.name)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Message:
    name: str

    def __post_init__(self):
        _check_identifier('message', self.name)

    def __str__(self) -> str:
        return self.name


class Kind(str, Enum):
    SEND = '!'
    RECEIVE = '?'


@dataclass(frozen=True, order=True)
class Interaction:
    """A->B:m, one symbol of a global word."""
    sender: Participant
    receiver: Participant
    msg: Message

    def __post_init__(self):
        if self.sender == self.receiver:
            raise SelfCommunication(self.sender)

    @classmethod
    def of(cls, sender: str, receiver: str, msg: str) -> 'Interaction':
        return cls(Participant(sender), Participant(receiver), Message(msg))

    @property
    def participants(self) -> FrozenSet[Participant]:
        return frozenset((self.sender, self.receiver))

    def __str__(self) -> str:
        return f"{self.sender}->{self.receiver}:{self.msg}"


@dataclass(frozen=True, order=True)
class Action:
    """AB!m or AB?m, one symbol of a local word."""
    sender: Participant
    receiver: Participant
    msg: Message
    kind: Kind

    def __post_init__(self):
        if self.sender == self.receiver:
            raise SelfCommunication(self.sender)

    @classmethod
    def send(cls, sender: str, receiver: str, msg: str) -> 'Action':
        return cls(Participant(sender), Participant(receiver), Message(msg), Kind.SEND)

    @classmethod
    def receive(cls, sender: str, receiver: str, msg: str) -> 'Action':
        return cls(Participant(sender), Participant(receiver), Message(msg), Kind.RECEIVE)

    @property
    def subject(self) -> Participant:
        return self.sender if self.kind is Kind.SEND else self.receiver

    @property
    def peer(self) -> Participant:
        return self.receiver if self.kind is Kind.SEND else self.sender

    @property
    def participants(self) -> FrozenSet[Participant]:
        return frozenset((self.sender, self.receiver))

    def __str__(self) -> str:
        return f"{self.sender}{self.receiver}{self.kind.value}{self.msg}"


Symbol = Union[Interaction, Action]
S = TypeVar('S', Interaction, Action)


# --- Words ---
def _primitive_root(cycle: Tuple) -> Tuple:
    n = len(cycle)
    for period in range(1, n + 1):
        if n % period == 0 and cycle[:period] * (n // period) == cycle:
            return cycle[:period]
    return cycle


def _canonical(prefix: Tuple, cycle: Tuple) -> Tuple[Tuple, Tuple]:
    cycle = _primitive_root(cycle)
    # Absorb the prefix tail into the cycle by rotation
    while prefix and prefix[-1] == cycle[-1]:
        prefix = prefix[:-1]
        cycle = (cycle[-1],) + cycle[:-1]
    return prefix, cycle


@total_ordering
@dataclass(frozen=True)
class Word(Generic[S]):
    """A finite word (empty cycle) or the ultimately periodic word prefix.cycle^w.

    Lassos are canonicalised on construction: the cycle is primitive and no
    rotation of it can be absorbed into the prefix, so structural equality is
    equality of the denoted omega-words.
    """
    prefix: Tuple[S, ...] = ()
    cycle: Tuple[S, ...] = ()

    def __post_init__(self):
        prefix, cycle = tuple(self.prefix), tuple(self.cycle)
        if cycle:
            prefix, cycle = _canonical(prefix, cycle)
        object.__setattr__(self, 'prefix', prefix)
        object.__setattr__(self, 'cycle', cycle)

    @classmethod
    def finite(cls, symbols: Iterable[S] = ()) -> 'Word[S]':
        return cls(tuple(symbols))

    @classmethod
    def lasso(cls, prefix: Iterable[S], cycle: Iterable[S]) -> 'Word[S]':
        cycle = tuple(cycle)
        if not cycle:
            raise ValueError("a lasso needs a non-empty cycle")
        return cls(tuple(prefix), cycle)

    @property
    def is_finite(self) -> bool:
        return not self.cycle

    @property
    def is_lasso(self) -> bool:
        return bool(self.cycle)

    @property
    def size(self) -> int:
        """Length of the finite representation (prefix plus one cycle)."""
        return len(self.prefix) + len(self.cycle)

    @property
    def is_empty(self) -> bool:
        return not self.prefix and not self.cycle

    def unroll(self, copies: int) -> Tuple[S, ...]:
        return self.prefix + self.cycle * copies

    def symbols_upto(self, length: int) -> Tuple[S, ...]:
        """The first `length` symbols (all of them for a shorter finite word)."""
        if self.is_finite or length <= len(self.prefix):
            return self.prefix[:length]
        copies = math.ceil((length - len(self.prefix)) / len(self.cycle))
        return self.unroll(copies)[:length]

    def prefixes(self) -> Iterator['Word[S]']:
        """Finite prefixes of a finite word, shortest first."""
        if self.is_lasso:
            raise ValueError("a lasso has infinitely many prefixes; use symbols_upto")
        for i in range(len(self.prefix) + 1):
            yield Word(self.prefix[:i])

    def append(self, symbol: S) -> 'Word[S]':
        if self.is_lasso:
            return self
        return Word(self.prefix + (symbol,))

    def __add__(self, other: 'Word[S]') -> 'Word[S]':
        # An infinite word absorbs whatever follows it
        if self.is_lasso:
            return self
        return Word(self.prefix + other.prefix, other.cycle)

    def _key(self):
        return (self.is_lasso, self.size, self.prefix, self.cycle)

    def __lt__(self, other: 'Word') -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self._key() < other._key()

    def __str__(self) -> str:
        head = SYMBOL_SEPARATOR.join(str(a) for a in self.prefix)
        if self.is_finite:
            return head or EMPTY_WORD_TEXT
        loop = f"( {SYMBOL_SEPARATOR.join(str(a) for a in self.cycle)} )^w"
        return f"{head} {loop}" if head else loop


EMPTY = Word()


def unroll(w: Word, copies: int) -> Word:
    """The finite word prefix.cycle^copies."""
    return Word(w.unroll(copies))


# --- Projection ---
def project_symbol(a: Interaction, p: Participant) -> Optional[Action]:
    if p == a.sender:
        return Action(a.sender, a.receiver, a.msg, Kind.SEND)
    if p == a.receiver:
        return Action(a.sender, a.receiver, a.msg, Kind.RECEIVE)
    return None


def _project_seq(seq: Tuple[Interaction, ...], p: Participant) -> Tuple[Action, ...]:
    return tuple(b for b in (project_symbol(a, p) for a in seq) if b is not None)


def project_word(w: Word[Interaction], p: Participant) -> Word[Action]:
    prefix = _project_seq(w.prefix, p)
    cycle = _project_seq(w.cycle, p)
    # A cycle invisible to p leaves only the finite projected prefix
    return Word(prefix, cycle)


def independent(a: Interaction, b: Interaction) -> bool:
    return a.participants.isdisjoint(b.participants)


# --- Prefix Order ---
class Order(Enum):
    EQUAL = 'Equal'
    STRICT_PREFIX_OF_SECOND = 'StrictPrefixOfSecond'
    STRICT_PREFIX_OF_FIRST = 'StrictPrefixOfFirst'
    INCOMPARABLE = 'Incomparable'


def _finite_prefix_of(seq: Tuple, w: Word) -> bool:
    return w.symbols_upto(len(seq)) == seq and (w.is_lasso or len(w.prefix) >= len(seq))


def upw_compare(u: Word, v: Word) -> Order:
    if u.is_finite and v.is_finite:
        if u.prefix == v.prefix:
            return Order.EQUAL
        if len(u.prefix) < len(v.prefix) and v.prefix[:len(u.prefix)] == u.prefix:
            return Order.STRICT_PREFIX_OF_SECOND
        if len(v.prefix) < len(u.prefix) and u.prefix[:len(v.prefix)] == v.prefix:
            return Order.STRICT_PREFIX_OF_FIRST
        return Order.INCOMPARABLE
    if u.is_finite:
        return Order.STRICT_PREFIX_OF_SECOND if _finite_prefix_of(u.prefix, v) else Order.INCOMPARABLE
    if v.is_finite:
        return Order.STRICT_PREFIX_OF_FIRST if _finite_prefix_of(v.prefix, u) else Order.INCOMPARABLE
    # Two lassos agree everywhere iff they agree up to this bound
    bound = len(u.prefix) + len(v.prefix) + 2 * math.lcm(len(u.cycle), len(v.cycle))
    if u.symbols_upto(bound) == v.symbols_upto(bound):
        return Order.EQUAL
    return Order.INCOMPARABLE


def is_prefix(u: Word, v: Word) -> bool:
    """u is a (not necessarily strict) prefix of v."""
    return upw_compare(u, v) in (Order.EQUAL, Order.STRICT_PREFIX_OF_SECOND)


# --- Participants ---
@singledispatch
def participants_of(x) -> FrozenSet[Participant]:
    """Participants occurring in a symbol, a word, or any iterable of those."""
    found = set()
    for item in x:
        found |= participants_of(item)
    return frozenset(found)


@participants_of.register(Interaction)
@participants_of.register(Action)
def _(x) -> FrozenSet[Participant]:
    return x.participants


@participants_of.register(Word)
def _(x: Word) -> FrozenSet[Participant]:
    found = set()
    for a in x.prefix + x.cycle:
        found |= a.participants
    return frozenset(found)
