# ./fcl/core/fsa.py

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import (Any, Callable, Dict, FrozenSet, Generic, Hashable, Iterable, List, Mapping,
                    Optional, Set, Tuple, TypeVar)

import networkx as nx

import config
from core.errors import InfiniteAntichain, StateBudgetExceeded
from core.words import Word

logger = logging.getLogger('fcl.core.fsa')

L = TypeVar('L')


def label_key(label: Any) -> Tuple:
    """Sort key placing epsilon (None) before every real label."""
    return (label is not None, label)


@dataclass(frozen=True)
class Transition(Generic[L]):
    source: str
    label: Optional[L]  # None is epsilon
    target: str

    def sort_key(self) -> Tuple:
        return (self.source, label_key(self.label), self.target)


@dataclass(frozen=True)
class LassoRun(Generic[L]):
    """stem.loop^w; the loop starts and ends where the stem ends."""
    stem: Tuple[Transition[L], ...]
    loop: Tuple[Transition[L], ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("a lasso run needs a non-empty loop")
        entry = self.stem[-1].target if self.stem else self.loop[0].source
        if self.loop[0].source != entry or self.loop[-1].target != entry:
            raise ValueError("the loop of a lasso run must start and end at the stem's end")

    @property
    def word(self) -> Word:
        return Word(tuple(t.label for t in self.stem if t.label is not None),
                    tuple(t.label for t in self.loop if t.label is not None))


@dataclass(frozen=True)
class Fsa(Generic[L]):
    """Finite-state automaton in which every state is accepting.

    `origin` maps generated state ids to what they stand for (the member
    subset after determinisation, the component pair after a product, the
    configuration of a CFSM product).
    """
    states: FrozenSet[str]
    initial: str
    transitions: FrozenSet[Transition[L]]
    origin: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)
    _out: Dict[str, Tuple[Transition[L], ...]] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'states', frozenset(self.states))
        object.__setattr__(self, 'transitions', frozenset(self.transitions))
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial} is not a state")
        out: Dict[str, List[Transition[L]]] = {s: [] for s in self.states}
        for t in self.transitions:
            if t.source not in self.states or t.target not in self.states:
                raise ValueError(f"transition {t} leaves the state set")
            out[t.source].append(t)
        object.__setattr__(self, '_out', {s: tuple(sorted(ts, key=Transition.sort_key)) for s, ts in out.items()})

    @classmethod
    def build(cls, initial: str, edges: Iterable[Tuple[str, Optional[L], str]],
              states: Iterable[str] = (), origin: Optional[Mapping[str, Any]] = None) -> 'Fsa[L]':
        transitions = {Transition(s, a, t) for s, a, t in edges}
        all_states = {initial, *states}
        for t in transitions:
            all_states.update((t.source, t.target))
        return cls(frozenset(all_states), initial, frozenset(transitions), dict(origin or {}))

    # --- Structure ---
    def out(self, state: str) -> Tuple[Transition[L], ...]:
        return self._out[state]

    @property
    def labels(self) -> List[L]:
        return sorted({t.label for t in self.transitions if t.label is not None})

    def sorted_states(self) -> List[str]:
        return sorted(self.states)

    def sorted_transitions(self) -> List[Transition[L]]:
        return sorted(self.transitions, key=Transition.sort_key)

    def is_deterministic(self) -> bool:
        return self.nondeterminism() is None

    def nondeterminism(self) -> Optional[Tuple[str, Optional[L]]]:
        """First (state, label) pair breaking determinism, if any."""
        for state in self.sorted_states():
            seen = set()
            for t in self._out[state]:
                if t.label is None or t.label in seen:
                    return state, t.label
                seen.add(t.label)
        return None

    def successor(self, state: str, label: L) -> Optional[str]:
        for t in self._out[state]:
            if t.label == label:
                return t.target
        return None

    def is_dead(self, state: str) -> bool:
        return not self._out[state]

    def closure(self, states: Iterable[str]) -> FrozenSet[str]:
        """Epsilon closure."""
        seen = set(states)
        stack = list(seen)
        while stack:
            for t in self._out[stack.pop()]:
                if t.label is None and t.target not in seen:
                    seen.add(t.target)
                    stack.append(t.target)
        return frozenset(seen)

    def step(self, states: Iterable[str], label: L) -> FrozenSet[str]:
        return self.closure(t.target for s in states for t in self._out[s] if t.label == label)

    def to_networkx(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.sorted_states())
        for t in self.sorted_transitions():
            graph.add_edge(t.source, t.target, label=t.label)
        return graph

    def relabel(self, fn: Callable[[L], Any]) -> 'Fsa':
        """Map every label through fn; fn returning None turns the edge into epsilon."""
        edges = {Transition(t.source, None if t.label is None else fn(t.label), t.target)
                 for t in self.transitions}
        return Fsa(self.states, self.initial, frozenset(edges), dict(self.origin))


# --- Paths ---
def bfs_tree(fsa: Fsa[L], start: Optional[str] = None,
             allowed: Optional[Callable[[Transition[L]], bool]] = None) -> Dict[str, Optional[Transition[L]]]:
    """Parent transition of every state reachable from start.

    Successors are visited in label order, so the path to each state is the
    shortlex-least one among the shortest paths.
    """
    start = fsa.initial if start is None else start
    parent: Dict[str, Optional[Transition[L]]] = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for t in fsa.out(state):
            if allowed is not None and not allowed(t):
                continue
            if t.target not in parent:
                parent[t.target] = t
                queue.append(t.target)
    return parent


def path_to(parent: Mapping[str, Optional[Transition[L]]], state: str) -> List[Transition[L]]:
    path = []
    while parent[state] is not None:
        t = parent[state]
        path.append(t)
        state = t.source
    path.reverse()
    return path


def path_word(path: Iterable[Transition[L]]) -> Word:
    return Word(tuple(t.label for t in path if t.label is not None))


def shortest_word(fsa: Fsa[L], target: str, start: Optional[str] = None) -> Optional[Word]:
    parent = bfs_tree(fsa, start)
    if target not in parent:
        return None
    return path_word(path_to(parent, target))


def reachable(fsa: Fsa[L]) -> Fsa[L]:
    keep = set(bfs_tree(fsa))
    edges = {t for t in fsa.transitions if t.source in keep}
    return Fsa(frozenset(keep), fsa.initial, frozenset(edges),
               {s: o for s, o in fsa.origin.items() if s in keep})


# --- Determinisation ---
def subset_name(members: Iterable[str]) -> str:
    return "{" + ",".join(sorted(members)) + "}"


def determinise(fsa: Fsa[L], budget: Optional[int] = None) -> Fsa[L]:
    budget = config.STATE_BUDGET if budget is None else budget
    start = fsa.closure([fsa.initial])
    names = {start: subset_name(start)}
    edges = []
    queue = deque([start])
    while queue:
        current = queue.popleft()
        labels = sorted({t.label for s in current for t in fsa.out(s) if t.label is not None}, key=label_key)
        for label in labels:
            target = fsa.step(current, label)
            if target not in names:
                if len(names) >= budget:
                    raise StateBudgetExceeded(budget)
                names[target] = subset_name(target)
                queue.append(target)
            edges.append((names[current], label, names[target]))
    logger.debug(f"Determinised {len(fsa.states)} states into {len(names)} subset states")
    return Fsa.build(names[start], edges, names.values(), {name: members for members, name in names.items()})


# --- Acceptance ---
def accepts(fsa: Fsa[L], w: Word[L]) -> bool:
    current = fsa.closure([fsa.initial])
    for a in w.prefix:
        current = fsa.step(current, a)
        if not current:
            return False
    if w.is_finite:
        return True
    # Subset states at cycle boundaries; a repetition closes the infinite run
    seen = set()
    while current not in seen:
        seen.add(current)
        for a in w.cycle:
            current = fsa.step(current, a)
            if not current:
                return False
    return True


def lasso_run(fsa: Fsa[L], w: Word[L]) -> Optional[LassoRun[L]]:
    """Run of a deterministic automaton spelling the lasso w, if accepted."""
    if w.is_finite:
        raise ValueError("lasso_run expects a lasso")
    state, stem = fsa.initial, []
    for a in w.prefix:
        nxt = fsa.successor(state, a)
        if nxt is None:
            return None
        stem.append(Transition(state, a, nxt))
        state = nxt
    boundaries: Dict[str, int] = {}
    rounds: List[Transition[L]] = []
    while state not in boundaries:
        boundaries[state] = len(rounds)
        for a in w.cycle:
            nxt = fsa.successor(state, a)
            if nxt is None:
                return None
            rounds.append(Transition(state, a, nxt))
            state = nxt
    cut = boundaries[state]
    return LassoRun(tuple(stem + rounds[:cut]), tuple(rounds[cut:]))


# --- Products ---
class Stay(Enum):
    STAY = 'stay'


STAY = Stay.STAY


def product(left: Fsa, right: Fsa, sync: Optional[Mapping[Hashable, Tuple[Any, Any]]] = None,
            budget: Optional[int] = None) -> Fsa:
    """Reachable synchronous product.

    sync maps each product label to the pair of component labels it moves
    (STAY keeps a component still). Without sync, both components move on the
    same label, which intersects the finite-word languages. Epsilon moves of
    either component are interleaved freely.
    """
    budget = config.STATE_BUDGET if budget is None else budget
    if sync is None:
        shared = set(left.labels) & set(right.labels)
        sync = {label: (label, label) for label in shared}
    moves = sorted(sync.items(), key=lambda item: label_key(item[0]))

    def name(pair: Tuple[str, str]) -> str:
        return f"({pair[0]},{pair[1]})"

    def targets(fsa: Fsa, state: str, label: Any) -> List[str]:
        if label is STAY:
            return [state]
        return sorted({t.target for t in fsa.out(state) if t.label == label})

    start = (left.initial, right.initial)
    seen = {start}
    edges = []
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        p, q = pair
        successors = []
        for t in left.out(p):
            if t.label is None:
                successors.append((None, (t.target, q)))
        for t in right.out(q):
            if t.label is None:
                successors.append((None, (p, t.target)))
        for label, (lm, rm) in moves:
            for p2 in targets(left, p, lm):
                for q2 in targets(right, q, rm):
                    successors.append((label, (p2, q2)))
        for label, nxt in successors:
            if nxt not in seen:
                if len(seen) >= budget:
                    raise StateBudgetExceeded(budget)
                seen.add(nxt)
                queue.append(nxt)
            edges.append((name(pair), label, name(nxt)))
    return Fsa.build(name(start), edges, (name(pair) for pair in seen), {name(pair): pair for pair in seen})


# --- Enumeration ---
def enumerate_words(fsa: Fsa[L], max_len: int, max_lassos: Optional[int] = None) -> Tuple[List[Word], List[Word]]:
    """Accepted finite words up to max_len and lassos whose run has stem+loop <= max_len."""
    max_lassos = config.MAX_LASSOS if max_lassos is None else max_lassos
    finite: Set[Word] = set()
    frontier = {(): fsa.closure([fsa.initial])}
    for length in range(max_len + 1):
        finite.update(Word(seq) for seq in frontier)
        if length == max_len:
            break
        grown = {}
        for seq, current in frontier.items():
            labels = {t.label for s in current for t in fsa.out(s) if t.label is not None}
            for label in labels:
                grown[seq + (label,)] = fsa.step(current, label)
        frontier = grown
    lassos = sorted(_lassos(determinise(fsa), max_len))
    if len(lassos) > max_lassos:
        logger.warning(f"Lassos truncated: kept {max_lassos} of {len(lassos)} up to length {max_len}")
        lassos = lassos[:max_lassos]
    return sorted(finite), lassos


def _lassos(det: Fsa[L], max_len: int) -> Set[Word]:
    found: Set[Word] = set()

    def walk(path_states: List[str], labels: List[L]):
        if len(labels) >= max_len:
            return
        for t in det.out(path_states[-1]):
            if t.target in path_states:
                at = path_states.index(t.target)
                found.add(Word(tuple(labels[:at]), tuple(labels[at:]) + (t.label,)))
            else:
                walk(path_states + [t.target], labels + [t.label])

    walk([det.initial], [])
    return found


# --- Progress ---
def dead_states(fsa: Fsa[L]) -> Set[str]:
    return {s for s in fsa.states if fsa.is_dead(s)}


def states_never_reaching(fsa: Fsa[L], wanted: Callable[[L], bool]) -> Set[str]:
    """States from which no wanted transition can ever be taken."""
    graph = nx.DiGraph(fsa.to_networkx())
    sources = {t.source for t in fsa.transitions if t.label is not None and wanted(t.label)}
    can_reach = set(sources)
    for s in sources:
        can_reach |= nx.ancestors(graph, s)
    return set(fsa.states) - can_reach


def free_graph(fsa: Fsa[L], wanted: Callable[[L], bool]) -> nx.DiGraph:
    """Graph of the transitions that are not wanted."""
    free = nx.DiGraph()
    free.add_nodes_from(fsa.states)
    free.add_edges_from((t.source, t.target) for t in fsa.transitions
                        if t.label is None or not wanted(t.label))
    return free


def states_avoiding(fsa: Fsa[L], wanted: Callable[[L], bool], stop_at_dead: bool) -> Set[str]:
    """States starting a run with no wanted transition that is infinite, or ends
    in a dead state when stop_at_dead is set."""
    free = free_graph(fsa, wanted)
    targets = cyclic_nodes(free)
    if stop_at_dead:
        targets |= dead_states(fsa)
    found = set(targets)
    for s in targets:
        found |= nx.ancestors(free, s)
    return found


# --- Maximal Words ---
def cyclic_nodes(graph: nx.DiGraph) -> Set[Any]:
    """Nodes lying on some cycle."""
    nodes = set()
    for component in nx.strongly_connected_components(graph):
        if len(component) > 1:
            nodes |= component
        else:
            (node,) = component
            if graph.has_edge(node, node):
                nodes.add(node)
    return nodes


def is_finitely_generated(det: Fsa[L]) -> bool:
    """Every cycle is a simple cycle with no way out, so maximal words are finitely many."""
    graph = nx.DiGraph(reachable(det).to_networkx())
    return all(len(det.out(node)) == 1 for node in cyclic_nodes(graph))


def maximal_words(fsa: Fsa[L], max_len: Optional[int] = None, budget: Optional[int] = None) -> List[Word]:
    """Maximal words of L(fsa).

    Exact when the language is finitely generated. Otherwise max_len bounds
    the finite maximal words and the lasso runs reported, and without a bound
    InfiniteAntichain is raised.
    """
    budget = config.STATE_BUDGET if budget is None else budget
    det = determinise(fsa, budget)
    if is_finitely_generated(det):
        return _exact_maximal(det, budget)
    if max_len is None:
        raise InfiniteAntichain("a cycle can be left or entered in more than one way")
    logger.warning(f"Maximal words truncated at length {max_len}")
    found = set(_lassos(det, max_len))
    finite, _ = enumerate_words(det, max_len, 0)
    for w in finite:
        state = det.initial
        for a in w.prefix:
            state = det.successor(state, a)
        if det.is_dead(state):
            found.add(w)
    return sorted(found)


def _exact_maximal(det: Fsa[L], budget: int) -> List[Word]:
    on_cycle = cyclic_nodes(nx.DiGraph(reachable(det).to_networkx()))
    found: List[Word] = []
    stack: List[Tuple[str, Tuple]] = [(det.initial, ())]
    while stack:
        state, labels = stack.pop()
        if state in on_cycle:
            loop, current = [], state
            while True:
                (t,) = det.out(current)
                loop.append(t.label)
                current = t.target
                if current == state:
                    break
            found.append(Word(labels, tuple(loop)))
        elif det.is_dead(state):
            found.append(Word(labels))
        else:
            for t in reversed(det.out(state)):
                stack.append((t.target, labels + (t.label,)))
        if len(found) > budget:
            raise StateBudgetExceeded(budget, "maximal words")
    return sorted(set(found))
