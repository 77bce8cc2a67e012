# ./fcl/core/gtypes.py

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple, Union

import networkx as nx

import config
from core import fsa
from core.cfsm import Cfsm, CfsmSystem, to_explicit
from core.chaut import ChorAutomaton
from core.errors import (DuplicateLabel, ProjectionUndefined, SelfCommunication, SourceSpan, StateBudgetExceeded,
                         UnboundVariable, UndefinedReason, UnguardedRecursion)
from core.fsa import Fsa
from core.langset import ExplicitLanguage, ExplicitSystem
from core.words import Action, Interaction, Kind, Message, Participant, Word

logger = logging.getLogger('fcl.core.gtypes')

STANDARD = 'standard'
GENERALISED = 'generalised'
MODES = (STANDARD, GENERALISED)


def _check_branches(branches) -> Tuple:
    branches = tuple(branches)
    if not branches:
        raise ValueError("a choice needs at least one branch")
    seen = set()
    for label, _ in branches:
        if label in seen:
            raise DuplicateLabel(label)
        seen.add(label)
    return branches


# --- Global Types ---
@dataclass(frozen=True)
class End:
    def __str__(self) -> str:
        return render_global(self)


@dataclass(frozen=True)
class Comm:
    """sender->receiver:{ l1 . G1, ... }; branch order is the written order."""
    sender: Participant
    receiver: Participant
    branches: Tuple[Tuple[Message, 'GlobalType'], ...]

    def __post_init__(self):
        if self.sender == self.receiver:
            raise SelfCommunication(self.sender)
        object.__setattr__(self, 'branches', _check_branches(self.branches))

    @classmethod
    def of(cls, sender: str, receiver: str, *branches: Tuple[str, 'GlobalType']) -> 'Comm':
        return cls(Participant(sender), Participant(receiver),
                   tuple((Message(label), g) for label, g in branches))

    def interaction(self, label: Message) -> Interaction:
        return Interaction(self.sender, self.receiver, label)

    def __str__(self) -> str:
        return render_global(self)


@dataclass(frozen=True)
class Rec:
    var: str
    body: 'GlobalType'

    def __str__(self) -> str:
        return render_global(self)


@dataclass(frozen=True)
class Var:
    var: str

    def __str__(self) -> str:
        return render_global(self)


GlobalType = Union[End, Comm, Rec, Var]


# --- Processes ---
@dataclass(frozen=True)
class Nil:
    def __str__(self) -> str:
        return render_process(self)


@dataclass(frozen=True)
class _Prefix:
    peer: Participant
    branches: Tuple[Tuple[Message, 'Process'], ...]

    def __post_init__(self):
        # Branch sets are unordered; keep them sorted so equal sets compare equal
        branches = _check_branches(self.branches)
        object.__setattr__(self, 'branches', tuple(sorted(branches, key=lambda b: b[0])))

    @classmethod
    def of(cls, peer: str, *branches: Tuple[str, 'Process']):
        return cls(Participant(peer), tuple((Message(label), p) for label, p in branches))

    @property
    def labels(self) -> FrozenSet[Message]:
        return frozenset(label for label, _ in self.branches)

    def branch(self, label: Message) -> Optional['Process']:
        for m, p in self.branches:
            if m == label:
                return p
        return None

    def __str__(self) -> str:
        return render_process(self)


class Out(_Prefix):
    pass


class In(_Prefix):
    pass


@dataclass(frozen=True)
class PRec:
    var: str
    body: 'Process'

    def __str__(self) -> str:
        return render_process(self)


@dataclass(frozen=True)
class PVar:
    var: str

    def __str__(self) -> str:
        return render_process(self)


Process = Union[Nil, Out, In, PRec, PVar]


# --- Rendering ---
def _render_branches(branches, render) -> str:
    return "{ " + ", ".join(f"{label} . {render(child)}" for label, child in branches) + " }"


def render_global(g: GlobalType) -> str:
    if isinstance(g, End):
        return 'end'
    if isinstance(g, Var):
        return g.var
    if isinstance(g, Rec):
        return f"rec {g.var} . {render_global(g.body)}"
    head = f"{g.sender}->{g.receiver}:"
    if len(g.branches) == 1:
        (label, child), = g.branches
        return f"{head}{label} . {render_global(child)}"
    return head + _render_branches(g.branches, render_global)


def render_process(p: Process) -> str:
    if isinstance(p, Nil):
        return '0'
    if isinstance(p, PVar):
        return p.var
    if isinstance(p, PRec):
        return f"rec {p.var} . {render_process(p.body)}"
    kind = Kind.SEND if isinstance(p, Out) else Kind.RECEIVE
    return f"{p.peer}{kind.value}" + _render_branches(p.branches, render_process)


# --- Well-formedness ---
def _walk(term, bound: FrozenSet[str], unguarded: FrozenSet[str], locate: Callable):
    if isinstance(term, (Var, PVar)):
        if term.var not in bound:
            raise UnboundVariable(term.var, locate(term))
        if term.var in unguarded:
            raise UnguardedRecursion(term.var, locate(term))
    elif isinstance(term, (Rec, PRec)):
        _walk(term.body, bound | {term.var}, unguarded | {term.var}, locate)
    elif isinstance(term, (Comm, Out, In)):
        for _, child in term.branches:
            _walk(child, bound, frozenset(), locate)


def validate(term: Union[GlobalType, Process],
             locate: Callable[[object], Optional[SourceSpan]] = lambda node: None) -> Union[GlobalType, Process]:
    """Check that a global type or process is closed and guarded.

    locate maps a variable node to its source position for the error report.
    """
    _walk(term, frozenset(), frozenset(), locate)
    return term


def subterms(term) -> Iterator:
    """Syntactic nodes in pre-order."""
    yield term
    if isinstance(term, (Rec, PRec)):
        yield from subterms(term.body)
    elif isinstance(term, (Comm, Out, In)):
        for _, child in term.branches:
            yield from subterms(child)


def _substitute(term, var: str, replacement):
    if isinstance(term, (Var, PVar)):
        return replacement if term.var == var else term
    if isinstance(term, (Rec, PRec)):
        if term.var == var:
            return term
        return type(term)(term.var, _substitute(term.body, var, replacement))
    if isinstance(term, Comm):
        return Comm(term.sender, term.receiver,
                    tuple((label, _substitute(child, var, replacement)) for label, child in term.branches))
    if isinstance(term, (Out, In)):
        return type(term)(term.peer, tuple((label, _substitute(child, var, replacement))
                                           for label, child in term.branches))
    return term


def unfold(g: GlobalType) -> GlobalType:
    """Unfold top-level recursion until a communication or end is exposed."""
    while isinstance(g, Rec):
        g = _substitute(g.body, g.var, g)
    return g


def unfold_process(p: Process) -> Process:
    while isinstance(p, PRec):
        p = _substitute(p.body, p.var, p)
    return p


def term_graph(g: GlobalType) -> nx.DiGraph:
    """Unfolded subterms reachable through branches; finite for closed regular terms."""
    start = unfold(g)
    graph = nx.DiGraph()
    graph.add_node(start)
    stack = [start]
    while stack:
        node = stack.pop()
        if not isinstance(node, Comm):
            continue
        for _, child in node.branches:
            child = unfold(child)
            if child not in graph:
                stack.append(child)
            graph.add_edge(node, child)
    return graph


def term_depth(term) -> int:
    """Longest chain of nested prefixes and binders; computed without recursion."""
    deepest = 0
    stack = [(term, 1)]
    while stack:
        node, depth = stack.pop()
        deepest = max(deepest, depth)
        if isinstance(node, (Rec, PRec)):
            stack.append((node.body, depth + 1))
        elif isinstance(node, (Comm, Out, In)):
            stack.extend((child, depth + 1) for _, child in node.branches)
    return deepest


def participants(g: GlobalType) -> List[Participant]:
    found = set()
    for node in term_graph(g):
        if isinstance(node, Comm):
            found.update((node.sender, node.receiver))
    return sorted(found)


# --- Semantics ---
class Semantics:
    """Transitions of global types by top-level and out-of-order steps.

    Enabled interactions are a least fixpoint over the term graph, so a
    recursive type enables an interaction only through a finite derivation.
    """

    def __init__(self):
        self._enabled: Dict[GlobalType, FrozenSet[Interaction]] = {}

    def enabled(self, g: GlobalType) -> FrozenSet[Interaction]:
        g = unfold(g)
        if g not in self._enabled:
            self._solve(g)
        return self._enabled[g]

    def _solve(self, g: GlobalType):
        pending = [n for n in term_graph(g) if n not in self._enabled]
        current = {n: frozenset() for n in pending}

        def value(n):
            return current[n] if n in current else self._enabled[n]

        changed = True
        while changed:
            changed = False
            for n in pending:
                if not isinstance(n, Comm):
                    continue
                top = {n.interaction(label) for label, _ in n.branches}
                inner = None
                for _, child in n.branches:
                    e = value(unfold(child))
                    inner = e if inner is None else inner & e
                ours = {n.sender, n.receiver}
                found = frozenset(top | {a for a in inner if a.participants.isdisjoint(ours)})
                if found != current[n]:
                    current[n] = found
                    changed = True
        self._enabled.update(current)

    def successor(self, g: GlobalType, alpha: Interaction) -> Optional[GlobalType]:
        g = unfold(g)
        if not isinstance(g, Comm) or alpha not in self.enabled(g):
            return None
        if (alpha.sender, alpha.receiver) == (g.sender, g.receiver):
            for label, child in g.branches:
                if label == alpha.msg:
                    return child
            return None
        return Comm(g.sender, g.receiver,
                    tuple((label, self.successor(child, alpha)) for label, child in g.branches))

    def step(self, g: GlobalType) -> List[Tuple[Interaction, GlobalType]]:
        return [(alpha, self.successor(g, alpha)) for alpha in sorted(self.enabled(g))]


def gt_step(G: GlobalType, semantics: Optional[Semantics] = None) -> List[Tuple[Interaction, GlobalType]]:
    """Every (interaction, continuation) pair, sorted by interaction."""
    return (semantics or Semantics()).step(G)


def gt_traces(G: GlobalType, max_len: int) -> Set[Word[Interaction]]:
    semantics = Semantics()
    found = {Word()}
    frontier = [((), G)]
    for _ in range(max_len):
        grown = []
        for seq, g in frontier:
            for alpha, nxt in semantics.step(g):
                grown.append((seq + (alpha,), nxt))
        found.update(Word(seq) for seq, _ in grown)
        frontier = grown
    return found


def gt_language(G: GlobalType, max_len: Optional[int] = None) -> ExplicitLanguage[Interaction]:
    """Traces of G up to max_len, kept as the antichain of the longest ones."""
    max_len = config.DEFAULT_MAX_LEN if max_len is None else max_len
    return ExplicitLanguage.from_words(gt_traces(G, max_len))


def gt_to_chaut(G: GlobalType, budget: Optional[int] = None, name: str = 'G') -> ChorAutomaton:
    """Reachable states of G as a c-automaton.

    Out-of-order steps under recursion can nest states without bound; those
    deeper than config.MAX_TERM_DEPTH count as exceeding the budget.
    """
    budget = config.STATE_BUDGET if budget is None else budget
    semantics = Semantics()
    start = unfold(G)
    ids = {start: 'q0'}
    edges = []
    queue = deque([start])
    while queue:
        g = queue.popleft()
        for alpha, nxt in semantics.step(g):
            nxt = unfold(nxt)
            if term_depth(nxt) > config.MAX_TERM_DEPTH:
                raise StateBudgetExceeded(config.MAX_TERM_DEPTH, "levels of nesting in global type states")
            if nxt not in ids:
                if len(ids) >= budget:
                    raise StateBudgetExceeded(budget, "global type states")
                ids[nxt] = f"q{len(ids)}"
                queue.append(nxt)
            edges.append((ids[g], alpha, ids[nxt]))
    logger.debug(f"Global type has {len(ids)} reachable states")
    origin = {state: render_global(g) for g, state in ids.items()}
    return ChorAutomaton(Fsa.build('q0', edges, ids.values(), origin), name)


# --- Projection ---
_Head = Tuple[type, Participant, Tuple[Tuple[Message, GlobalType], ...]]


class _Projector:
    def __init__(self, G: GlobalType, X: Participant, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown projection mode {mode!r}")
        self.X = X
        self.mode = mode
        self.graph = term_graph(G)
        self.involved = {n for n in self.graph
                         if isinstance(n, Comm) and X in (n.sender, n.receiver)}
        self.reaching = set(self.involved)
        for n in self.involved:
            self.reaching |= nx.ancestors(self.graph, n)
        self.heads: Dict[GlobalType, Optional[_Head]] = {}
        self.active: Dict[GlobalType, str] = {}
        self.used: Set[str] = set()
        self.done: Dict[GlobalType, Process] = {}

    def check_depth(self):
        free = self.graph.subgraph(n for n in self.graph if n not in self.involved)
        for n in fsa.cyclic_nodes(free):
            if n in self.reaching:
                raise ProjectionUndefined(self.X, UndefinedReason.UNBOUNDED_DEPTH,
                                          f"a loop avoiding {self.X} leads to {render_global(n)}")

    def head(self, g: GlobalType) -> Optional[_Head]:
        if g not in self.heads:
            self.heads[g] = self._head(g)
        return self.heads[g]

    def _head(self, g: GlobalType) -> Optional[_Head]:
        if g not in self.reaching:
            return None
        if self.X == g.sender:
            return Out, g.receiver, g.branches
        if self.X == g.receiver:
            return In, g.sender, g.branches
        heads = [self.head(unfold(child)) for _, child in g.branches]
        if len(heads) == 1:
            return heads[0]
        return self._merge(g, heads)

    def _merge(self, g: GlobalType, heads: List[Optional[_Head]]) -> _Head:
        kinds = {None if h is None else h[0] for h in heads}
        allowed = {In} if self.mode == STANDARD else {In, Out}
        if len(kinds) != 1 or not kinds <= allowed:
            raise ProjectionUndefined(self.X, UndefinedReason.MIXED_DIRECTIONS,
                                      f"branches of {g.sender}->{g.receiver} start differently")
        peers = {h[1] for h in heads}
        if len(peers) != 1:
            raise ProjectionUndefined(self.X, UndefinedReason.MERGE_CLASH,
                                      f"branches talk to {', '.join(map(str, sorted(peers)))}")
        merged, seen = [], set()
        for h in heads:
            for label, child in h[2]:
                if label in seen:
                    raise ProjectionUndefined(self.X, UndefinedReason.MERGE_CLASH,
                                              f"label {label} occurs in more than one branch")
                seen.add(label)
                merged.append((label, child))
        return heads[0][0], heads[0][1], tuple(merged)

    def build(self, g: GlobalType) -> Process:
        if g in self.done:
            return self.done[g]
        if g in self.active:
            self.used.add(self.active[g])
            return PVar(self.active[g])
        h = self.head(g)
        if h is None:
            return Nil()
        kind, peer, branches = h
        var = f"t{len(self.active)}"
        self.active[g] = var
        body = kind(peer, tuple((label, self.build(unfold(child))) for label, child in branches))
        del self.active[g]
        result = PRec(var, body) if var in self.used else body
        self.used.discard(var)
        if not self.active:
            self.done[g] = result
        return result


def proj_gt(G: GlobalType, X: Participant, mode: str = STANDARD) -> Process:
    """Local behaviour of X in G; raises ProjectionUndefined with the reason."""
    projector = _Projector(G, X, mode)
    projector.check_depth()
    process = projector.build(unfold(G))
    logger.debug(f"Projection of G on {X} ({mode}): {render_process(process)}")
    return process


def is_projectable(G: GlobalType, mode: str = STANDARD) -> bool:
    try:
        mps_of(G, mode)
    except ProjectionUndefined:
        return False
    return True


# --- Multiparty Sessions ---
def process_peers(p: Process) -> Set[Participant]:
    return {node.peer for node in subterms(p) if isinstance(node, (Out, In))}


@dataclass(frozen=True)
class Mps:
    parts: Mapping[Participant, Process]

    def __post_init__(self):
        parts = dict(sorted(self.parts.items()))
        object.__setattr__(self, 'parts', parts)
        for A, P in parts.items():
            if A in process_peers(P):
                raise SelfCommunication(A)

    @property
    def participants(self) -> Tuple[Participant, ...]:
        return tuple(self.parts)

    def __getitem__(self, participant: Participant) -> Process:
        return self.parts[participant]

    def __hash__(self):
        return hash(tuple(self.parts.items()))

    def __str__(self) -> str:
        return " | ".join(f"{A} |> {render_process(P)}" for A, P in self.parts.items())


def mps_of(G: GlobalType, mode: str = STANDARD) -> Mps:
    return Mps({X: proj_gt(G, X, mode) for X in participants(G)})


def mps_step(M: Mps) -> List[Tuple[Interaction, Mps]]:
    """Handshakes A->B:l; the receiver must offer every label the sender may choose."""
    moves = []
    for A in M.participants:
        sender = unfold_process(M[A])
        if not isinstance(sender, Out) or sender.peer not in M.parts:
            continue
        B = sender.peer
        receiver = unfold_process(M[B])
        if not isinstance(receiver, In) or receiver.peer != A:
            continue
        if not sender.labels <= receiver.labels:
            continue
        for label, continuation in sender.branches:
            other = receiver.branch(label)
            assert other is not None and len(receiver.labels) == len(receiver.branches)
            parts = dict(M.parts)
            parts[A], parts[B] = continuation, other
            moves.append((Interaction(A, B, label), Mps(parts)))
    return sorted(moves, key=lambda move: move[0])


def mps_traces(M: Mps, max_len: int) -> Set[Word[Interaction]]:
    found = {Word()}
    frontier = [((), M)]
    for _ in range(max_len):
        grown = [(seq + (alpha,), nxt) for seq, m in frontier for alpha, nxt in mps_step(m)]
        found.update(Word(seq) for seq, _ in grown)
        frontier = grown
    return found


def process_fsa(owner: Participant, P: Process) -> Fsa[Action]:
    """Automaton of the actions owner performs when running P."""
    start = unfold_process(P)
    ids = {start: 'q0'}
    edges = []
    queue = deque([start])
    while queue:
        p = queue.popleft()
        if isinstance(p, (Nil, PVar)):
            continue
        kind = Kind.SEND if isinstance(p, Out) else Kind.RECEIVE
        for label, child in p.branches:
            child = unfold_process(child)
            if child not in ids:
                ids[child] = f"q{len(ids)}"
                queue.append(child)
            sender, receiver = (owner, p.peer) if kind is Kind.SEND else (p.peer, owner)
            edges.append((ids[p], Action(sender, receiver, label, kind), ids[child]))
    return Fsa.build('q0', edges, ids.values())


def mps_system(M: Mps) -> CfsmSystem:
    return CfsmSystem({A: Cfsm(A, process_fsa(A, P)) for A, P in M.parts.items()})


def mps_to_explicit(M: Mps, max_len: Optional[int] = None) -> ExplicitSystem:
    """Abstract system of the session.

    Without max_len the process languages must be finitely generated. With
    it every local word up to max_len is kept, which is exact for semantics
    words of that length.
    """
    if max_len is None:
        return to_explicit(mps_system(M))
    parts = {}
    for A, P in M.parts.items():
        finite, _ = fsa.enumerate_words(process_fsa(A, P), max_len, 0)
        parts[A] = ExplicitLanguage.from_words(finite, subject=A)
    return ExplicitSystem(parts)
