# ./fcl/core/cfsm.py

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import config
from core import fsa
from core.errors import NonDeterministicMachine, NonLocalAction, StateBudgetExceeded, UnknownParticipant
from core.fsa import Fsa
from core.langset import ExplicitLanguage, ExplicitSystem, stuck_states
from core.results import CfsmProperty, CfsmWitness, PropertyName, Verdict
from core.words import Action, Interaction, Kind, Participant, participants_of

logger = logging.getLogger('fcl.core.cfsm')

# Each CFSM property is decided like its counterpart on the abstract system
PROPERTY_COUNTERPART = {
    CfsmProperty.LIVENESS: PropertyName.LF,
    CfsmProperty.LOCK_FREEDOM: PropertyName.SLF,
    CfsmProperty.DEADLOCK_FREEDOM: PropertyName.DF,
}


@dataclass(frozen=True)
class Cfsm:
    """Deterministic automaton over the actions of a single participant."""
    owner: Participant
    automaton: Fsa[Action]

    def __post_init__(self):
        clash = self.automaton.nondeterminism()
        if clash is not None:
            state, label = clash
            raise NonDeterministicMachine(self.owner, state, label)
        for t in self.automaton.sorted_transitions():
            if t.label.subject != self.owner:
                raise NonLocalAction(self.owner, t.label)

    @property
    def initial(self) -> str:
        return self.automaton.initial

    def successor(self, state: str, action: Action) -> Optional[str]:
        return self.automaton.successor(state, action)

    def is_enabled(self, state: str) -> bool:
        return not self.automaton.is_dead(state)


@dataclass(frozen=True)
class CfsmSystem:
    machines: Mapping[Participant, Cfsm]

    def __post_init__(self):
        machines = dict(sorted(self.machines.items()))
        object.__setattr__(self, 'machines', machines)
        for A, machine in machines.items():
            if machine.owner != A:
                raise NonLocalAction(A, f"machine owned by {machine.owner}")
            unknown = participants_of(machine.automaton.labels) - set(machines)
            if unknown:
                raise UnknownParticipant(min(unknown))

    @property
    def participants(self) -> Tuple[Participant, ...]:
        return tuple(self.machines)

    def __getitem__(self, participant: Participant) -> Cfsm:
        return self.machines[participant]

    def __hash__(self):
        return hash(tuple(self.machines.items()))


# --- Configurations ---
Configuration = Tuple[str, ...]


def configuration_id(participants: Tuple[Participant, ...], configuration: Configuration) -> str:
    return ",".join(f"{A}:{q}" for A, q in zip(participants, configuration))


def _handshakes(S: CfsmSystem, configuration: Configuration) -> List[Tuple[Interaction, Configuration]]:
    index = {A: i for i, A in enumerate(S.participants)}
    moves = []
    for i, A in enumerate(S.participants):
        for t in S[A].automaton.out(configuration[i]):
            send = t.label
            if send.kind is not Kind.SEND:
                continue
            j = index[send.receiver]
            target = S[send.receiver].successor(configuration[j], Action(send.sender, send.receiver, send.msg, Kind.RECEIVE))
            if target is None:
                continue
            nxt = list(configuration)
            nxt[i], nxt[j] = t.target, target
            moves.append((Interaction(send.sender, send.receiver, send.msg), tuple(nxt)))
    return sorted(moves)


def sync_product(S: CfsmSystem, budget: Optional[int] = None) -> Fsa[Interaction]:
    """Synchronous semantics: configurations reachable by handshakes.

    State ids render the configuration (`A:q0,B:p1`); `origin` maps them back
    to the per-participant state tuple.
    """
    budget = config.STATE_BUDGET if budget is None else budget
    participants = S.participants
    start = tuple(S[A].initial for A in participants)
    seen = {start}
    edges = []
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for alpha, nxt in _handshakes(S, current):
            if nxt not in seen:
                if len(seen) >= budget:
                    raise StateBudgetExceeded(budget)
                seen.add(nxt)
                queue.append(nxt)
            edges.append((configuration_id(participants, current), alpha, configuration_id(participants, nxt)))
    ids = {configuration_id(participants, c): c for c in seen}
    logger.debug(f"Synchronous product of {len(participants)} machines has {len(ids)} configurations")
    return Fsa.build(configuration_id(participants, start), edges, ids.keys(), ids)


# --- Communication Properties ---
def check_cfsm_property(S: CfsmSystem, p: CfsmProperty, budget: Optional[int] = None,
                        product: Optional[Fsa[Interaction]] = None) -> Verdict:
    """First (participant, configuration) pair violating p; configurations are
    visited in breadth-first order so the reported trace is a shortest one."""
    p = CfsmProperty(p)
    product = sync_product(S, budget) if product is None else product
    parent = fsa.bfs_tree(product)
    order = list(parent)
    for i, A in enumerate(S.participants):
        stuck = stuck_states(product, A, PROPERTY_COUNTERPART[p])
        for state in order:
            configuration = product.origin[state]
            if state in stuck and S[A].is_enabled(configuration[i]):
                trace = fsa.path_word(fsa.path_to(parent, state))
                logger.info(f"{p.value} violated for {A} at {state}")
                return Verdict(p.value, CfsmWitness(state, A, trace), {'configurations': len(order)})
    return Verdict(p.value, None, {'configurations': len(order)})


def check_cfsm_properties(S: CfsmSystem, budget: Optional[int] = None) -> Dict[CfsmProperty, Verdict]:
    product = sync_product(S, budget)
    return {p: check_cfsm_property(S, p, product=product) for p in CfsmProperty}


# --- Abstract System ---
def machine_language(machine: Cfsm, max_len: Optional[int] = None) -> ExplicitLanguage[Action]:
    generators = fsa.maximal_words(machine.automaton, max_len)
    return ExplicitLanguage.from_words(generators, subject=machine.owner)


def to_explicit(S: CfsmSystem, max_len: Optional[int] = None) -> ExplicitSystem:
    """The abstract system whose parts are the machine languages.

    Exact when every machine language is finitely generated; otherwise max_len
    must bound the generators or InfiniteAntichain is raised.
    """
    return ExplicitSystem({A: machine_language(S[A], max_len) for A in S.participants})

