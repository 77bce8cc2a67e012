# ./fcl/core/langset.py

from __future__ import annotations

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import (Callable, Dict, FrozenSet, Generic, Iterable, List, Mapping, Optional, Set,
                    Tuple)

import config
from core.errors import (DegenerateParticipant, NonAntichain, NonLocalAction, StateBudgetExceeded,
                         UnknownParticipant, ValidationError)
from core import fsa
from core.fsa import Fsa, determinise
from core.results import (BaWitness, CuiWitness, PropertyName, PropWitness, SwapWitness, Verdict,
                          Witness)
from core.words import (EMPTY, Action, Interaction, Kind, Order, Participant, S, Word,
                        independent, is_prefix, participants_of, project_symbol, project_word,
                        upw_compare)

logger = logging.getLogger('fcl.core.langset')

__all__ = [
    'ExplicitLanguage', 'ExplicitSystem', 'PropertyName', 'Witness', 'CuiWitness', 'BaWitness',
    'PropWitness', 'SwapWitness', 'Verdict', 'ResidualGraph', 'member', 'maximal_words',
    'project_language', 'sem_member', 'sem_enumerate', 'sem_maximal', 'closure_language',
    'residual_graph', 'check_cui', 'cui_hub_sufficient', 'check_ba', 'check_property',
    'check_properties', 'stuck_states', 'concurrency_equiv', 'is_concurrency_closed_bounded',
    'language_includes', 'system_includes', 'selector', 'validate_cui_witness',
    'validate_ba_witness',
]


# --- Helper Methods ---
def _maximal(words: Iterable[Word]) -> Set[Word]:
    """Drop every word that is a strict prefix of another one."""
    words = set(words)
    finite = [w for w in words if w.is_finite]
    lassos = [w for w in words if w.is_lasso]
    longest = max((len(w.prefix) for w in finite), default=0)
    covered = set()
    for w in finite:
        for i in range(len(w.prefix)):
            covered.add(w.prefix[:i])
    for w in lassos:
        seq = w.symbols_upto(longest)
        for i in range(len(seq) + 1):
            covered.add(seq[:i])
    return {w for w in finite if w.prefix not in covered} | set(lassos)


def _comparable_pair(words: Iterable[Word]) -> Optional[Tuple[Word, Word]]:
    ordered = sorted(words)
    for u in ordered:
        for v in ordered:
            if u != v and upw_compare(u, v) is Order.STRICT_PREFIX_OF_SECOND:
                return u, v
    return None


# --- Languages ---
@dataclass(frozen=True)
class ExplicitLanguage(Generic[S]):
    """Prefix closure of a finite antichain of generators (finite words and lassos).

    A local language records its subject; every action must then belong to it.
    """
    generators: FrozenSet[Word[S]] = frozenset({EMPTY})
    subject: Optional[Participant] = None
    _prefixes: FrozenSet[Tuple] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        gens = frozenset(self.generators) or frozenset({EMPTY})
        object.__setattr__(self, 'generators', gens)
        if len(_maximal(gens)) != len(gens):
            first, second = _comparable_pair(gens)
            raise NonAntichain(first, second)
        if self.subject is not None:
            for g in gens:
                for a in g.prefix + g.cycle:
                    if not isinstance(a, Action) or a.subject != self.subject:
                        raise NonLocalAction(self.subject, a)
        prefixes = set()
        for g in gens:
            if g.is_finite:
                prefixes.update(g.prefix[:i] for i in range(len(g.prefix) + 1))
        object.__setattr__(self, '_prefixes', frozenset(prefixes))

    @classmethod
    def from_words(cls, words: Iterable[Word[S]], subject: Optional[Participant] = None) -> 'ExplicitLanguage[S]':
        """Language generated by any set of words (non-maximal ones are dropped)."""
        return cls(frozenset(_maximal(words)), subject)

    def sorted_generators(self) -> List[Word[S]]:
        return sorted(self.generators)

    @property
    def has_lassos(self) -> bool:
        return any(g.is_lasso for g in self.generators)

    @property
    def horizon(self) -> int:
        """Length covering every finite generator and one turn of every lasso."""
        return max((g.size for g in self.generators), default=0)

    def finite_words(self, max_len: Optional[int] = None) -> List[Word[S]]:
        max_len = self.horizon if max_len is None else max_len
        seqs = set()
        for g in self.generators:
            seq = g.symbols_upto(max_len)
            seqs.update(seq[:i] for i in range(len(seq) + 1))
        return sorted(Word(seq) for seq in seqs)

    def __contains__(self, w: Word[S]) -> bool:
        return member(self, w)

    def __str__(self) -> str:
        return "pref{" + ", ".join(str(g) for g in self.sorted_generators()) + "}"


@participants_of.register(ExplicitLanguage)
def _(x: ExplicitLanguage):
    return participants_of(x.generators)


def member(L: ExplicitLanguage, w: Word) -> bool:
    if w.is_finite:
        if w.prefix in L._prefixes:
            return True
        return any(is_prefix(w, g) for g in L.generators if g.is_lasso)
    return w in L.generators


def maximal_words(L: ExplicitLanguage) -> List[Word]:
    """The maximal words of L, which are exactly its generators."""
    return L.sorted_generators()


def language_includes(L: ExplicitLanguage, M: ExplicitLanguage) -> bool:
    """M is a subset of L."""
    return all(member(L, g) for g in M.generators)


# --- Systems ---
@dataclass(frozen=True)
class ExplicitSystem:
    parts: Mapping[Participant, ExplicitLanguage[Action]]

    def __post_init__(self):
        parts = dict(sorted(self.parts.items()))
        object.__setattr__(self, 'parts', parts)
        for A, lang in parts.items():
            for g in lang.generators:
                for a in g.prefix + g.cycle:
                    if not isinstance(a, Action) or a.subject != A:
                        raise NonLocalAction(A, a)
            if lang.generators == frozenset({EMPTY}):
                raise DegenerateParticipant(A)
            unknown = participants_of(lang) - set(parts)
            if unknown:
                raise UnknownParticipant(min(unknown))

    @property
    def participants(self) -> Tuple[Participant, ...]:
        return tuple(self.parts)

    def __getitem__(self, participant: Participant) -> ExplicitLanguage[Action]:
        return self.parts[participant]

    def __hash__(self):
        return hash(tuple(self.parts.items()))


def system_includes(S: ExplicitSystem, T: ExplicitSystem) -> bool:
    """T is pointwise included in S."""
    return all(A in S.parts and language_includes(S[A], T[A]) for A in T.participants)


def project_language(L: ExplicitLanguage[Interaction]) -> ExplicitSystem:
    participants = sorted(participants_of(L))
    if not participants:
        raise ValidationError("a language without participants has no projection")
    parts = {}
    for A in participants:
        local = ExplicitLanguage.from_words((project_word(g, A) for g in L.generators), subject=A)
        if local.generators == frozenset({EMPTY}):
            raise DegenerateParticipant(A)
        parts[A] = local
    return ExplicitSystem(parts)


def sem_member(S: ExplicitSystem, w: Word[Interaction]) -> bool:
    if not participants_of(w) <= set(S.parts):
        return False
    return all(member(lang, project_word(w, A)) for A, lang in S.parts.items())


# --- Residual-State Graph ---
Residual = FrozenSet[Word]
State = Tuple[Residual, ...]


def _derive_word(g: Word, a) -> Optional[Word]:
    if g.prefix:
        return Word(g.prefix[1:], g.cycle) if g.prefix[0] == a else None
    if g.cycle and g.cycle[0] == a:
        return Word(g.cycle[1:], g.cycle)
    return None


def derive(residual: Residual, a) -> Residual:
    """Generator suffixes still compatible after reading a (empty if a is not enabled)."""
    return frozenset(d for d in (_derive_word(g, a) for g in residual) if d is not None)


def enabled(residual: Residual) -> List:
    return sorted({(g.prefix or g.cycle)[0] for g in residual if not g.is_empty})


def is_pending(residual: Residual) -> bool:
    """The local word read so far is not maximal."""
    return any(not g.is_empty for g in residual)


def _moves(participants: Tuple[Participant, ...], state: State) -> List[Tuple[Interaction, State]]:
    index = {A: i for i, A in enumerate(participants)}
    moves = []
    for i, A in enumerate(participants):
        for a in enabled(state[i]):
            if a.kind is not Kind.SEND or a.receiver not in index:
                continue
            j = index[a.receiver]
            receive = Action(a.sender, a.receiver, a.msg, Kind.RECEIVE)
            after_receive = derive(state[j], receive)
            if not after_receive:
                continue
            nxt = list(state)
            nxt[i] = derive(state[i], a)
            nxt[j] = after_receive
            moves.append((Interaction(a.sender, a.receiver, a.msg), tuple(nxt)))
    moves.sort(key=lambda move: move[0])
    return moves


@dataclass
class ResidualGraph:
    """Semantics of an explicit system as a deterministic graph over residual tuples."""
    participants: Tuple[Participant, ...]
    initial: State
    edges: Dict[State, List[Tuple[Interaction, State]]]
    parent: Dict[State, Optional[Tuple[State, Interaction]]]
    order: List[State]

    def word_to(self, state: State) -> Word[Interaction]:
        symbols = []
        while self.parent[state] is not None:
            state, alpha = self.parent[state]
            symbols.append(alpha)
        return Word(tuple(reversed(symbols)))

    def pending(self, state: State, participant: Participant) -> bool:
        return is_pending(state[self.participants.index(participant)])

    def is_dead(self, state: State) -> bool:
        return not self.edges[state]

    def ids(self) -> Dict[State, str]:
        return {state: f"s{i}" for i, state in enumerate(self.order)}

    def to_fsa(self) -> Fsa[Interaction]:
        ids = self.ids()
        edges = [(ids[s], alpha, ids[t]) for s in self.order for alpha, t in self.edges[s]]
        return Fsa.build(ids[self.initial], edges, ids.values(), {ids[s]: s for s in self.order})


def residual_graph(S: ExplicitSystem, budget: Optional[int] = None) -> ResidualGraph:
    budget = config.STATE_BUDGET if budget is None else budget
    participants = S.participants
    initial = tuple(S[A].generators for A in participants)
    edges: Dict[State, List[Tuple[Interaction, State]]] = {}
    parent: Dict[State, Optional[Tuple[State, Interaction]]] = {initial: None}
    order = [initial]
    queue = deque([initial])
    while queue:
        state = queue.popleft()
        edges[state] = _moves(participants, state)
        for alpha, nxt in edges[state]:
            if nxt not in parent:
                if len(parent) >= budget:
                    raise StateBudgetExceeded(budget)
                parent[nxt] = (state, alpha)
                order.append(nxt)
                queue.append(nxt)
    logger.debug(f"Residual graph over {len(participants)} participants has {len(order)} states")
    return ResidualGraph(participants, initial, edges, parent, order)


# --- Semantics ---
def sem_enumerate(S: ExplicitSystem, max_len: int) -> Set[Word[Interaction]]:
    participants = S.participants
    frontier = {(): tuple(S[A].generators for A in participants)}
    found = set()
    for length in range(max_len + 1):
        found.update(Word(seq) for seq in frontier)
        if length == max_len:
            break
        frontier = {seq + (alpha,): nxt for seq, state in frontier.items()
                    for alpha, nxt in _moves(participants, state)}
    return found


def sem_maximal(S: ExplicitSystem, max_len: Optional[int] = None, budget: Optional[int] = None) -> List[Word[Interaction]]:
    """Maximal words of the semantics; exact when they are finitely many."""
    return fsa.maximal_words(residual_graph(S, budget).to_fsa(), max_len, budget)


def closure_language(S: ExplicitSystem, max_len: Optional[int] = None) -> ExplicitLanguage[Interaction]:
    """The semantics of S as an explicit language."""
    return ExplicitLanguage.from_words(sem_maximal(S, max_len))


# --- Closure Under Unknown Information ---
def validate_cui_witness(witness: CuiWitness, contains: Callable[[Word], bool]) -> bool:
    alpha = witness.alpha
    A, B = alpha.sender, alpha.receiver
    return (contains(witness.w1.append(alpha)) and contains(witness.w2.append(alpha))
            and contains(witness.w) and not contains(witness.w.append(alpha))
            and witness.w.is_finite
            and project_word(witness.w, A) == project_word(witness.w1, A)
            and project_word(witness.w, B) == project_word(witness.w2, B))


def _least_cui_witness(L: ExplicitLanguage[Interaction], words: List[Word]) -> Optional[CuiWitness]:
    alphabet = sorted({a for w in words for a in w.prefix})
    for alpha in alphabet:
        A, B = alpha.sender, alpha.receiver
        extend, blocked = [], defaultdict(list)
        for w in words:
            if member(L, w.append(alpha)):
                extend.append(w)
            else:
                blocked[(project_word(w, A), project_word(w, B))].append(w)
        for w1 in extend:
            on_sender = project_word(w1, A)
            for w2 in extend:
                hits = blocked.get((on_sender, project_word(w2, B)))
                if hits:
                    return CuiWitness(w1, w2, hits[0], alpha)
    return None


def _word_with_projection(L: ExplicitLanguage[Interaction], participant: Participant,
                          target: Tuple[Action, ...]) -> Word[Interaction]:
    """Shortest word of L whose projection is target and whose last symbol produced its last action."""
    start = (L.generators, 0)
    parent = {start: None}
    queue = deque([start])
    while queue:
        residual, pos = node = queue.popleft()
        for beta in enabled(residual):
            image = project_symbol(beta, participant)
            if image is None:
                nxt = (derive(residual, beta), pos)
            elif pos < len(target) and image == target[pos]:
                nxt = (derive(residual, beta), pos + 1)
            else:
                continue
            if nxt in parent:
                continue
            parent[nxt] = (node, beta)
            if nxt[1] == len(target) and image is not None:
                symbols = []
                while parent[nxt] is not None:
                    nxt, sym = parent[nxt]
                    symbols.append(sym)
                return Word(tuple(reversed(symbols)))
            queue.append(nxt)
    raise AssertionError(f"no word of the language projects on {participant} to {target}")


def _semantic_cui_witness(L: ExplicitLanguage[Interaction], budget: Optional[int]) -> Optional[CuiWitness]:
    """Search the projected semantics for a word leaving L; exact for lasso generators."""
    graph = residual_graph(project_language(L), budget)
    start = (graph.initial, L.generators)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        sys_state, residual = node
        for alpha, sys_next in graph.edges[sys_state]:
            after = derive(residual, alpha)
            if not after:
                symbols, cursor = [], node
                while parent[cursor] is not None:
                    cursor, sym = parent[cursor]
                    symbols.append(sym)
                w = Word(tuple(reversed(symbols)))
                A, B = alpha.sender, alpha.receiver
                extended = w.append(alpha)
                w1 = _word_with_projection(L, A, project_word(extended, A).prefix)
                w2 = _word_with_projection(L, B, project_word(extended, B).prefix)
                return CuiWitness(Word(w1.prefix[:-1]), Word(w2.prefix[:-1]), w, alpha)
            nxt = (sys_next, after)
            if nxt not in parent:
                parent[nxt] = (node, alpha)
                queue.append(nxt)
    return None


def check_cui(L: ExplicitLanguage[Interaction], budget: Optional[int] = None) -> Verdict:
    """Least CUI witness over the finite words up to the generator horizon; lasso
    generators fall back to a search of the projected semantics beyond it."""
    words = L.finite_words()
    witness = _least_cui_witness(L, words)
    if witness is None and L.has_lassos:
        witness = _semantic_cui_witness(L, budget)
    if witness is not None:
        assert validate_cui_witness(witness, lambda u: member(L, u)), witness
        logger.info(f"CUI violated on {witness.alpha}")
    return Verdict('cui', witness, {'generators': len(L.generators), 'words': len(words)})


def cui_hub_sufficient(L: ExplicitLanguage[Interaction]) -> bool:
    """Some participant takes part in every interaction of L."""
    hubs = None
    for g in L.generators:
        for a in g.prefix + g.cycle:
            hubs = set(a.participants) if hubs is None else hubs & a.participants
    return hubs is None or bool(hubs)


# --- Branch-Awareness ---
def validate_ba_witness(witness: BaWitness, contains: Callable[[Word], bool],
                        is_maximal: Callable[[Word], bool]) -> bool:
    return (witness.w1 != witness.w2
            and contains(witness.w1) and contains(witness.w2)
            and is_maximal(witness.w1) and is_maximal(witness.w2)
            and upw_compare(project_word(witness.w1, witness.x), project_word(witness.w2, witness.x))
            is Order.STRICT_PREFIX_OF_SECOND)


def selector(w1: Word[Interaction], w2: Word[Interaction]) -> Optional[Participant]:
    """First participant whose projections of w1 and w2 differ and are incomparable."""
    for X in sorted(participants_of([w1, w2])):
        if upw_compare(project_word(w1, X), project_word(w2, X)) is Order.INCOMPARABLE:
            return X
    return None


def check_ba(L: ExplicitLanguage[Interaction]) -> Verdict:
    gens = L.sorted_generators()
    for X in sorted(participants_of(L)):
        projected = [(g, project_word(g, X)) for g in gens]
        for g1, p1 in projected:
            for g2, p2 in projected:
                if upw_compare(p1, p2) is Order.STRICT_PREFIX_OF_SECOND:
                    witness = BaWitness(X, g1, g2)
                    assert validate_ba_witness(witness, lambda u: member(L, u), lambda u: u in L.generators)
                    return Verdict('ba', witness, {'generators': len(gens)})
    return Verdict('ba', None, {'generators': len(gens)})


# --- Communication Properties ---
def _harmonicity(S: ExplicitSystem, graph: ResidualGraph) -> Optional[PropWitness]:
    semantics = graph.to_fsa()
    for A in S.participants:
        local = determinise(semantics.relabel(lambda alpha, A=A: project_symbol(alpha, A)))
        start = (S[A].generators, local.initial)
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            residual, realised = node
            for a in enabled(residual):
                nxt_realised = local.successor(realised, a)
                if nxt_realised is None:
                    symbols, cursor = [a], node
                    while parent[cursor] is not None:
                        cursor, sym = parent[cursor]
                        symbols.append(sym)
                    v = Word(tuple(reversed(symbols)))
                    return PropWitness(PropertyName.HA, A, v, f"local word {v} is not realised by the semantics")
                nxt = (derive(residual, a), nxt_realised)
                if nxt not in parent:
                    parent[nxt] = (node, a)
                    queue.append(nxt)
    return None


def stuck_states(semantics: Fsa[Interaction], participant: Participant, p: PropertyName) -> Set[str]:
    """States from which participant can be left behind in the sense of property p."""
    def involves(alpha: Interaction) -> bool:
        return participant in alpha.participants

    if p is PropertyName.DF:
        return fsa.dead_states(semantics)
    if p is PropertyName.LF:
        return fsa.states_never_reaching(semantics, involves)
    return fsa.states_avoiding(semantics, involves, stop_at_dead=p is PropertyName.SLF)


_NOTES = {
    PropertyName.DF: "projection {proj} not maximal",
    PropertyName.LF: "projection {proj} not maximal and no continuation involves {part}",
    PropertyName.SF: "projection {proj} not maximal and an infinite continuation avoids {part}",
    PropertyName.SLF: "projection {proj} not maximal and a maximal continuation avoids {part}",
}


def _property_witness(S: ExplicitSystem, graph: ResidualGraph, p: PropertyName) -> Optional[PropWitness]:
    if p is PropertyName.HA:
        return _harmonicity(S, graph)
    semantics, ids = graph.to_fsa(), graph.ids()
    for A in S.participants:
        stuck = stuck_states(semantics, A, p)
        for state in graph.order:
            if ids[state] in stuck and graph.pending(state, A):
                w = graph.word_to(state)
                note = _NOTES[p].format(proj=project_word(w, A), part=A)
                return PropWitness(p, A, w, note)
    return None


def check_property(S: ExplicitSystem, p: PropertyName, budget: Optional[int] = None,
                   graph: Optional[ResidualGraph] = None) -> Verdict:
    p = PropertyName(p)
    graph = residual_graph(S, budget) if graph is None else graph
    witness = _property_witness(S, graph, p)
    if witness is not None:
        logger.info(f"{p.value} violated for {witness.part} after {witness.w}")
    return Verdict(p.value, witness, {'states': len(graph.order)})


def check_properties(S: ExplicitSystem, budget: Optional[int] = None) -> Dict[PropertyName, Verdict]:
    graph = residual_graph(S, budget)
    return {p: check_property(S, p, graph=graph) for p in PropertyName}


# --- Concurrency Closure ---
def concurrency_equiv(w1: Word[Interaction], w2: Word[Interaction]) -> bool:
    if w1.is_lasso or w2.is_lasso:
        raise ValueError("concurrency_equiv compares finite words")
    return all(project_word(w1, A) == project_word(w2, A) for A in participants_of([w1, w2]))


def is_concurrency_closed_bounded(L: ExplicitLanguage[Interaction], max_len: int) -> Verdict:
    for w in L.finite_words(max_len):
        seq = w.prefix
        for i in range(len(seq) - 1):
            if not independent(seq[i], seq[i + 1]):
                continue
            swapped = Word(seq[:i] + (seq[i + 1], seq[i]) + seq[i + 2:])
            if not member(L, swapped):
                return Verdict('concurrency', SwapWitness(w, swapped), {'max_len': max_len})
    return Verdict('concurrency', None, {'max_len': max_len})
