# ./fcl/core/results.py

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional, Tuple, Union

from core.words import Interaction, Participant, Word


class PropertyName(str, Enum):
    HA = 'HA'
    DF = 'DF'
    LF = 'LF'
    SF = 'SF'
    SLF = 'SLF'


class CfsmProperty(str, Enum):
    LIVENESS = 'Liveness'
    LOCK_FREEDOM = 'LockFreedom'
    DEADLOCK_FREEDOM = 'DeadlockFreedom'


# --- Witnesses ---
@dataclass(frozen=True)
class CuiWitness:
    """w1.alpha and w2.alpha are in L, w agrees with w1 on the sender and with w2
    on the receiver, yet w.alpha is not in L."""
    w1: Word
    w2: Word
    w: Word
    alpha: Interaction
    states: Optional[Tuple[str, ...]] = None  # (q, Q_X, Q_Y) when found on an automaton


@dataclass(frozen=True)
class BaWitness:
    """Two maximal words that x cannot tell apart: proj(w1, x) is a strict prefix of proj(w2, x)."""
    x: Participant
    w1: Word
    w2: Word
    states: Optional[Tuple[str, str]] = None
    same_state_only: bool = False


@dataclass(frozen=True)
class PropWitness:
    p: PropertyName
    part: Participant
    w: Word
    note: str


@dataclass(frozen=True)
class CfsmWitness:
    configuration: str
    participant: Participant
    trace: Word


@dataclass(frozen=True)
class SwapWitness:
    w_in: Word
    w_out: Word


@dataclass(frozen=True)
class Counterexample:
    word: Word
    rejected: Tuple[Word, ...] = ()


Witness = Union[CuiWitness, BaWitness, PropWitness, CfsmWitness, SwapWitness, Counterexample]


@dataclass(frozen=True)
class Verdict:
    check: str
    witness: Optional[Witness] = None
    stats: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    @property
    def holds(self) -> bool:
        return self.witness is None
