# ./fcl/tests/helpers.py

import os
import random
from typing import List

from core import parsers
from core.cfsm import Cfsm, CfsmSystem
from core.chaut import ChorAutomaton
from core.fsa import Fsa
from core.langset import ExplicitLanguage
from core.words import Action, Interaction, Participant, Word

CORPUS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'corpus')

PARTICIPANTS = ('A', 'B', 'C')
MESSAGES = ('m', 'n')


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def load(name: str):
    return parsers.load(corpus_path(name))


def ix(text: str) -> Interaction:
    """`A->B:m` as an interaction."""
    sender, rest = text.split('->')
    receiver, msg = rest.split(':')
    return Interaction.of(sender, receiver, msg)


def gw(text: str) -> Word:
    """A global word written as in .gl files (`eps`, `a . b`, `u ( v )^w`)."""
    head = 'loop:' if ')^w' in text else 'max:'
    (w,) = parsers.parse_glang(f"{head} {text}\n").generators
    return w


def lw(subject: str, text: str) -> Word:
    """A local word of subject, written as in .ll files."""
    head = 'loop:' if ')^w' in text else 'max:'
    (w,) = parsers.parse_glang(f"subject: {subject}\n{head} {text}\n").generators
    return w


def glang(*words: str) -> ExplicitLanguage:
    return ExplicitLanguage.from_words(gw(w) for w in words)


# --- Task Dispatching ---
def _dispatch_body(depth: int) -> List[tuple]:
    """Words of the nonterminal for dispatched tasks; each occurrence costs one unit of depth."""
    if depth == 0:
        return [()]
    inner = _dispatch_body(depth - 1)
    offer = (ix('S->D:a'), ix('D->S:t'))
    parked = offer + (ix('S->H:t'),)
    resumed = (ix('S->H:r'), ix('H->S:r'), ix('S->D:d'))
    words = [()]
    words += [parked + u + resumed + v for u in inner for v in inner]
    words += [offer + (ix('S->D:d'),) + u for u in inner]
    return words


def task_dispatching(depth: int) -> ExplicitLanguage:
    """Server S, dispatcher D and helper H, with the nesting of parked tasks bounded by depth."""
    stop = (ix('S->D:s'), ix('S->H:s'))
    return ExplicitLanguage.from_words(Word(body + stop) for body in _dispatch_body(depth))


# --- Random Corpora ---
def random_interaction(rng: random.Random, participants=PARTICIPANTS) -> Interaction:
    sender, receiver = rng.sample(participants, 2)
    return Interaction.of(sender, receiver, rng.choice(MESSAGES))


def random_chaut(rng: random.Random, max_states: int = 6, cyclic: bool = False,
                 loops: bool = False) -> ChorAutomaton:
    """Deterministic c-automaton whose transitions all leave reachable states.

    Acyclic automata only move to higher-numbered states; cyclic ones may also
    jump back. With loops, some dead states of an acyclic automaton are closed
    by a simple cycle, so the maximal words stay finitely many.
    """
    n = rng.randint(2, max_states)
    reachable = {0}
    edges = []
    for i in range(n):
        if i not in reachable:
            continue
        used = set()
        for _ in range(rng.randint(0 if i else 1, 2)):
            alpha = random_interaction(rng)
            if alpha in used:
                continue
            if i + 1 < n and (not cyclic or rng.random() < 0.7):
                j = rng.randint(i + 1, n - 1)
            elif cyclic:
                j = rng.randint(0, i)
            else:
                continue
            used.add(alpha)
            reachable.add(j)
            edges.append((f"q{i}", alpha, f"q{j}"))
    if loops and not cyclic:
        live = {source for source, _, _ in edges}
        for k, dead in enumerate(sorted(f"q{i}" for i in reachable if f"q{i}" not in live)):
            if rng.random() < 0.6:
                cycle = [dead] + [f"l{k}_{m}" for m in range(rng.randint(0, 1))]
                for source, target in zip(cycle, cycle[1:] + [dead]):
                    edges.append((source, random_interaction(rng), target))
    return ChorAutomaton(Fsa.build('q0', edges), 'random')


def random_language(rng: random.Random) -> ExplicitLanguage:
    words = []
    for _ in range(rng.randint(1, 3)):
        length = rng.randint(1, 4)
        words.append(Word(tuple(random_interaction(rng) for _ in range(length))))
    return ExplicitLanguage.from_words(words)


def random_cfsm_system(rng: random.Random, max_states: int = 4, branching: bool = True) -> CfsmSystem:
    """Two or three deterministic machines; forward moves mostly, back edges close loops.

    Without branching every machine is a line that may loop back, so its
    maximal words are finitely many.
    """
    names = [Participant(name) for name in PARTICIPANTS[:rng.randint(2, len(PARTICIPANTS))]]
    machines = {}
    for owner in names:
        peers = [p for p in names if p != owner]
        n = rng.randint(1, max_states)
        edges = []
        for i in range(n):
            used = set()
            for _ in range(rng.randint(0 if i else 1, 2 if branching else 1)):
                peer, msg = rng.choice(peers), rng.choice(MESSAGES)
                if rng.random() < 0.5:
                    action = Action.send(owner.name, peer.name, msg)
                else:
                    action = Action.receive(peer.name, owner.name, msg)
                if action in used:
                    continue
                used.add(action)
                if i + 1 < n and rng.random() < 0.7:
                    j = rng.randint(i + 1, n - 1)
                else:
                    j = rng.randint(0, i)
                edges.append((f"q{i}", action, f"q{j}"))
        machines[owner] = Cfsm(owner, Fsa.build('q0', edges))
    return CfsmSystem(machines)
