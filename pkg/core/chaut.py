# ./fcl/core/chaut.py

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

import config
from core import fsa
from core.cfsm import Cfsm, CfsmSystem, sync_product
from core.errors import CompletenessViolation, DegenerateParticipant, DeterminismViolation, StateBudgetExceeded
from core.fsa import STAY, Fsa, Transition
from core.langset import validate_ba_witness, validate_cui_witness
from core.results import BaWitness, Counterexample, CuiWitness, Verdict
from core.words import Action, Interaction, Participant, Word, participants_of, project_symbol, project_word

logger = logging.getLogger('fcl.core.chaut')


@dataclass(frozen=True)
class ChorAutomaton:
    """Deterministic automaton over interactions; every state is accepting."""
    automaton: Fsa[Interaction]
    name: str = 'A'

    def __post_init__(self):
        clash = self.automaton.nondeterminism()
        if clash is not None:
            raise DeterminismViolation(*clash)

    @property
    def participants(self) -> List[Participant]:
        return sorted(participants_of(self.automaton.labels))

    def accepts(self, w: Word[Interaction]) -> bool:
        return fsa.accepts(self.automaton, w)

    def is_maximal(self, w: Word[Interaction]) -> bool:
        if not self.accepts(w):
            return False
        if w.is_lasso:
            return True
        state = self.automaton.initial
        for alpha in w.prefix:
            state = self.automaton.successor(state, alpha)
        return self.automaton.is_dead(state)


# --- Projection ---
def project_participant(A: ChorAutomaton, X: Participant) -> Fsa[Action]:
    """Determinised projection of A on X; states are named after the subsets they stand for."""
    return fsa.determinise(A.automaton.relabel(lambda alpha: project_symbol(alpha, X)))


def project_chaut(A: ChorAutomaton) -> CfsmSystem:
    machines = {}
    for X in A.participants:
        machine = project_participant(A, X)
        if not machine.transitions:
            raise DegenerateParticipant(X)
        machines[X] = Cfsm(X, machine)
    return CfsmSystem(machines)


# --- Paths ---
def _unwind(parent: Dict, node) -> List:
    symbols = []
    while parent[node] is not None:
        node, symbol = parent[node]
        symbols.append(symbol)
    symbols.reverse()
    return symbols


def _word_with_projection(A: ChorAutomaton, participant: Participant, target: Word[Action], end: str) -> Word[Interaction]:
    """Shortest word of A reaching end whose projection on participant is target."""
    automaton = A.automaton
    wanted = target.prefix
    start = (automaton.initial, 0)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        state, pos = node
        if node == (end, len(wanted)):
            return Word(tuple(_unwind(parent, node)))
        for t in automaton.out(state):
            image = project_symbol(t.label, participant)
            if image is None:
                nxt = (t.target, pos)
            elif pos < len(wanted) and image == wanted[pos]:
                nxt = (t.target, pos + 1)
            else:
                continue
            if nxt not in parent:
                parent[nxt] = (node, t.label)
                queue.append(nxt)
    raise AssertionError(f"{end} is not reachable with projection {target} on {participant}")


# --- Closure Under Unknown Information ---
def _sender_receiver_pairs(A: ChorAutomaton) -> List[Tuple[Participant, Participant]]:
    return sorted({(alpha.sender, alpha.receiver) for alpha in A.automaton.labels})


def _cui_search(A: ChorAutomaton, X: Participant, Y: Participant, budget: int) -> Optional[CuiWitness]:
    automaton = A.automaton
    det_x, det_y = project_participant(A, X), project_participant(A, Y)
    alphas = [alpha for alpha in automaton.labels if (alpha.sender, alpha.receiver) == (X, Y)]

    def move(det: Fsa, subset: str, image: Optional[Action]) -> str:
        return subset if image is None else det.successor(subset, image)

    start = (automaton.initial, det_x.initial, det_y.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        q, qx, qy = node
        for alpha in alphas:
            if automaton.successor(q, alpha) is not None:
                continue
            sources_x = sorted(s for s in det_x.origin[qx] if automaton.successor(s, alpha) is not None)
            sources_y = sorted(s for s in det_y.origin[qy] if automaton.successor(s, alpha) is not None)
            if sources_x and sources_y:
                w = Word(tuple(_unwind(parent, node)))
                w1 = _word_with_projection(A, X, project_word(w, X), sources_x[0])
                w2 = _word_with_projection(A, Y, project_word(w, Y), sources_y[0])
                return CuiWitness(w1, w2, w, alpha, (q, qx, qy))
        for t in automaton.out(q):
            nxt = (t.target, move(det_x, qx, project_symbol(t.label, X)), move(det_y, qy, project_symbol(t.label, Y)))
            if nxt not in parent:
                if len(parent) >= budget:
                    raise StateBudgetExceeded(budget)
                parent[nxt] = (node, t.label)
                queue.append(nxt)
    logger.debug(f"CUI search on ({X},{Y}) explored {len(parent)} triples")
    return None


def decide_cui(A: ChorAutomaton, budget: Optional[int] = None) -> Verdict:
    """Searches, per sender/receiver pair, the product of A with the determinised
    projections on both ends; a witness is a reachable triple where both ends
    believe an interaction is possible but A refuses it."""
    budget = config.STATE_BUDGET if budget is None else budget
    pairs = _sender_receiver_pairs(A)
    for X, Y in pairs:
        witness = _cui_search(A, X, Y, budget)
        if witness is not None:
            assert validate_cui_witness(witness, A.accepts), witness
            logger.info(f"CUI violated on {witness.alpha} at {witness.states}")
            return Verdict('cui', witness, {'pairs': len(pairs)})
    return Verdict('cui', None, {'pairs': len(pairs)})


# --- Branch-Awareness ---
def twin_product(A: ChorAutomaton, X: Participant, budget: Optional[int] = None) -> Fsa:
    """A against itself, moving one copy on X-free interactions and both copies
    on interactions that look the same to X."""
    labels = A.automaton.labels
    sync = {}
    for alpha in labels:
        image = project_symbol(alpha, X)
        if image is None:
            sync[('L', alpha)] = (alpha, STAY)
            sync[('R', alpha)] = (STAY, alpha)
            continue
        for beta in labels:
            if project_symbol(beta, X) == image:
                sync[('X', alpha, beta)] = (alpha, beta)
    return fsa.product(A.automaton, A.automaton, sync, budget)


def _stems(path: Iterable[Transition]) -> Tuple[Word, Word]:
    left, right = [], []
    for t in path:
        tag = t.label[0]
        if tag in ('L', 'X'):
            left.append(t.label[1])
        if tag == 'R':
            right.append(t.label[1])
        if tag == 'X':
            right.append(t.label[2])
    return Word(tuple(left)), Word(tuple(right))


def _free_continuation(automaton: Fsa[Interaction], start: str, X: Participant, targets: Set[str]) -> Word:
    """Maximal X-free continuation from start, ending dead or on an X-free cycle."""
    def free(t: Transition) -> bool:
        return X not in t.label.participants

    parent = fsa.bfs_tree(automaton, start, free)
    end = min((s for s in parent if s in targets), key=lambda s: (len(fsa.path_to(parent, s)), s))
    stem = fsa.path_word(fsa.path_to(parent, end))
    if automaton.is_dead(end):
        return stem
    # Shortest X-free cycle through end
    for t in automaton.out(end):
        if not free(t):
            continue
        back = fsa.bfs_tree(automaton, t.target, free)
        if end in back:
            loop = (t.label,) + fsa.path_word(fsa.path_to(back, end)).prefix
            return Word(stem.prefix, loop)
    raise AssertionError(f"{end} lies on no {X}-free cycle")


def _any_maximal(automaton: Fsa[Interaction], start: str) -> Word:
    """Follow the least transition until a dead state or a repeated state."""
    visited = [start]
    labels = []
    state = start
    while not automaton.is_dead(state):
        t = automaton.out(state)[0]
        labels.append(t.label)
        state = t.target
        if state in visited:
            at = visited.index(state)
            return Word(tuple(labels[:at]), tuple(labels[at:]))
        visited.append(state)
    return Word(tuple(labels))


def _involving_continuation(automaton: Fsa[Interaction], start: str, X: Participant) -> Word:
    """Shortest path to an X-interaction, that interaction, then any maximal continuation."""
    parent = fsa.bfs_tree(automaton, start)
    for s in sorted(parent, key=lambda s: (len(fsa.path_to(parent, s)), s)):
        for t in automaton.out(s):
            if X in t.label.participants:
                head = fsa.path_word(fsa.path_to(parent, s)).append(t.label)
                return head + _any_maximal(automaton, t.target)
    raise AssertionError(f"no {X}-interaction is reachable from {start}")


def _ba_search(A: ChorAutomaton, X: Participant, budget: Optional[int]) -> Optional[BaWitness]:
    automaton = A.automaton

    def involves(alpha: Interaction) -> bool:
        return X in alpha.participants

    silent_ends = fsa.states_avoiding(automaton, involves, stop_at_dead=True)
    stuck = fsa.dead_states(automaton) | fsa.cyclic_nodes(fsa.free_graph(automaton, involves))
    talking = automaton.states - fsa.states_never_reaching(automaton, involves)
    twins = twin_product(A, X, budget)
    parent = fsa.bfs_tree(twins)
    candidates = sorted(twins.origin[s] for s in parent
                        if twins.origin[s][0] in silent_ends and twins.origin[s][1] in talking)
    if not candidates:
        return None
    distinct = [pair for pair in candidates if pair[0] != pair[1]]
    p, q = distinct[0] if distinct else candidates[0]
    if not distinct:
        logger.warning(f"Branch-awareness witness for {X} exists only at p = q = {p}")
    stem_p, stem_q = _stems(fsa.path_to(parent, f"({p},{q})"))
    w1 = stem_p + _free_continuation(automaton, p, X, stuck)
    w2 = stem_q + _involving_continuation(automaton, q, X)
    return BaWitness(X, w1, w2, (p, q), same_state_only=not distinct)


def decide_ba(A: ChorAutomaton, participants: Optional[Iterable[Participant]] = None,
              budget: Optional[int] = None) -> Verdict:
    """Branch-awareness of L(A), optionally restricted to some participants.

    Pairs (p, q) with p = q are searched too; a pair with p != q is preferred
    and the witness is flagged when only p = q pairs exist.
    """
    chosen = A.participants if participants is None else sorted(participants)
    for X in chosen:
        witness = _ba_search(A, X, budget)
        if witness is not None:
            assert validate_ba_witness(witness, A.accepts, A.is_maximal), witness
            logger.info(f"Branch-awareness violated for {X} at {witness.states}")
            return Verdict('ba', witness, {'participants': len(chosen)})
    return Verdict('ba', None, {'participants': len(chosen)})


# --- Realisation ---
@dataclass(frozen=True)
class RealisationReport:
    """Bounded comparison of L(A) with the semantics of its projection.

    complete is always true: a word of A missing from the projected semantics
    raises CompletenessViolation instead.
    """
    max_len: int
    rejected: Tuple[Word[Interaction], ...] = ()
    complete: bool = True
    stats: Dict[str, int] = field(default_factory=dict, compare=False)

    @property
    def correct(self) -> bool:
        return not self.rejected

    @property
    def counterexample(self) -> Optional[Word[Interaction]]:
        return self.rejected[0] if self.rejected else None

    def to_verdict(self) -> Verdict:
        witness = Counterexample(self.rejected[0], self.rejected) if self.rejected else None
        return Verdict('realisation', witness, dict(self.stats, max_len=self.max_len))


def check_realisation(A: ChorAutomaton, max_len: Optional[int] = None, budget: Optional[int] = None) -> RealisationReport:
    max_len = config.DEFAULT_MAX_LEN if max_len is None else max_len
    product = sync_product(project_chaut(A), budget)
    own_finite, own_lassos = fsa.enumerate_words(A.automaton, max_len)
    for w in own_finite + own_lassos:
        if not fsa.accepts(product, w):
            raise CompletenessViolation(w)
    finite, lassos = fsa.enumerate_words(product, max_len)
    rejected = tuple(sorted(w for w in finite + lassos if not A.accepts(w)))
    if rejected:
        logger.info(f"Projection of {A.name} admits {len(rejected)} words outside its language")
    stats = {'configurations': len(product.states), 'words': len(finite) + len(lassos)}
    return RealisationReport(max_len, rejected, stats=stats)
