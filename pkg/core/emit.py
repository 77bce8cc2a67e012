# ./fcl/core/emit.py

from __future__ import annotations

import json
import logging
from functools import singledispatch
from typing import Any, Dict, Iterable, Iterator, List, Optional

import config
from core.cfsm import Cfsm, CfsmSystem
from core.chaut import ChorAutomaton, RealisationReport
from core.fsa import Fsa
from core.results import (BaWitness, CfsmWitness, Counterexample, CuiWitness, PropWitness, SwapWitness,
                          Verdict, Witness)
from core.words import Word

logger = logging.getLogger('fcl.core.emit')

START_NODE = '__start'


# --- DOT ---
def _gvquote(s: Any) -> str:
    return '"{}"'.format(str(s).replace('\\', '\\\\').replace('"', r'\"'))


def _label_text(label: Any) -> str:
    return 'eps' if label is None else str(label)


def graphviz(automaton: Fsa, name: str = 'A') -> Iterator[str]:
    """The automaton as DOT lines; states and edges are sorted so output is stable."""
    yield f"digraph {_gvquote(name)} {{\n"
    yield f"  rankdir={config.DOT_RANKDIR};\n"
    yield f"  {START_NODE} [shape=point];\n"
    for state in automaton.sorted_states():
        yield f"  {_gvquote(state)} [shape=circle];\n"
    yield f"  {START_NODE} -> {_gvquote(automaton.initial)};\n"
    for t in automaton.sorted_transitions():
        yield f"  {_gvquote(t.source)} -> {_gvquote(t.target)} [label={_gvquote(_label_text(t.label))}];\n"
    yield "}\n"


@singledispatch
def emit_dot(x, name: Optional[str] = None) -> str:
    raise TypeError(f"cannot render {type(x).__name__} as DOT")


@emit_dot.register(Fsa)
def _(x: Fsa, name: Optional[str] = None) -> str:
    return "".join(graphviz(x, name or 'A'))


@emit_dot.register(ChorAutomaton)
def _(x: ChorAutomaton, name: Optional[str] = None) -> str:
    return "".join(graphviz(x.automaton, name or x.name))


@emit_dot.register(Cfsm)
def _(x: Cfsm, name: Optional[str] = None) -> str:
    return "".join(graphviz(x.automaton, name or str(x.owner)))


@emit_dot.register(CfsmSystem)
def _(x: CfsmSystem, name: Optional[str] = None) -> str:
    # One digraph per machine
    return "".join(emit_dot(x[A]) for A in x.participants)


# --- JSON Reports ---
def word_json(w: Word) -> Any:
    if w.is_finite:
        return [str(a) for a in w.prefix]
    return {"prefix": [str(a) for a in w.prefix], "cycle": [str(a) for a in w.cycle]}


@singledispatch
def witness_json(witness) -> Dict[str, Any]:
    raise TypeError(f"unknown witness {type(witness).__name__}")


@witness_json.register(CuiWitness)
def _(witness: CuiWitness) -> Dict[str, Any]:
    return {
        "kind": "cui",
        "alpha": str(witness.alpha),
        "w1": word_json(witness.w1),
        "w2": word_json(witness.w2),
        "w": word_json(witness.w),
        "states": list(witness.states) if witness.states else None,
    }


@witness_json.register(BaWitness)
def _(witness: BaWitness) -> Dict[str, Any]:
    return {
        "kind": "ba",
        "participant": str(witness.x),
        "w1": word_json(witness.w1),
        "w2": word_json(witness.w2),
        "states": list(witness.states) if witness.states else None,
        "same_state_only": witness.same_state_only,
    }


@witness_json.register(PropWitness)
def _(witness: PropWitness) -> Dict[str, Any]:
    return {
        "kind": "property",
        "property": witness.p.value,
        "participant": str(witness.part),
        "w": word_json(witness.w),
        "note": witness.note,
    }


@witness_json.register(CfsmWitness)
def _(witness: CfsmWitness) -> Dict[str, Any]:
    return {
        "kind": "cfsm",
        "participant": str(witness.participant),
        "configuration": witness.configuration,
        "trace": word_json(witness.trace),
    }


@witness_json.register(SwapWitness)
def _(witness: SwapWitness) -> Dict[str, Any]:
    return {"kind": "swap", "inside": word_json(witness.w_in), "outside": word_json(witness.w_out)}


@witness_json.register(Counterexample)
def _(witness: Counterexample) -> Dict[str, Any]:
    return {
        "kind": "realisation",
        "word": word_json(witness.word),
        "rejected": [word_json(w) for w in witness.rejected],
    }


def report_json(verdict: Verdict) -> Dict[str, Any]:
    """Report fields in the fixed order check, holds, witness, stats."""
    return {
        "check": verdict.check,
        "holds": verdict.holds,
        "witness": None if verdict.witness is None else witness_json(verdict.witness),
        "stats": dict(sorted(verdict.stats.items())),
    }


def emit_report(result) -> str:
    """One verdict as a JSON object, several as a JSON array."""
    if isinstance(result, RealisationReport):
        result = result.to_verdict()
    if isinstance(result, Verdict):
        payload: Any = report_json(result)
    else:
        payload = [report_json(v) for v in result]
    return json.dumps(payload, indent=config.JSON_INDENT, ensure_ascii=True) + "\n"


# --- Plain Text ---
def _describe(witness: Witness) -> List[str]:
    if isinstance(witness, CuiWitness):
        lines = [f"  alpha: {witness.alpha}", f"  w1:    {witness.w1}", f"  w2:    {witness.w2}",
                 f"  w:     {witness.w}"]
        if witness.states:
            lines.append(f"  states: {', '.join(witness.states)}")
        return lines
    if isinstance(witness, BaWitness):
        lines = [f"  participant: {witness.x}", f"  w1: {witness.w1}", f"  w2: {witness.w2}"]
        if witness.same_state_only:
            lines.append("  (only found with both runs in the same state)")
        return lines
    if isinstance(witness, PropWitness):
        return [f"  participant: {witness.part}", f"  after: {witness.w}", f"  {witness.note}"]
    if isinstance(witness, CfsmWitness):
        return [f"  participant: {witness.participant}", f"  configuration: {witness.configuration}",
                f"  trace: {witness.trace}"]
    if isinstance(witness, SwapWitness):
        return [f"  in language:     {witness.w_in}", f"  not in language: {witness.w_out}"]
    lines = [f"  counterexample: {witness.word}"]
    lines += [f"  rejected: {w}" for w in witness.rejected[1:]]
    return lines


def render_verdict(verdict: Verdict) -> str:
    status = 'holds' if verdict.holds else 'violated'
    lines = [f"{verdict.check}: {status}"]
    if verdict.witness is not None:
        lines += _describe(verdict.witness)
    return "\n".join(lines) + "\n"


def render_words(words: Iterable[Word]) -> str:
    return "".join(f"{w}\n" for w in words)
