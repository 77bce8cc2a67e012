# ./fcl/core/parsers.py

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from core.cfsm import Cfsm, CfsmSystem
from core.chaut import ChorAutomaton
from core.errors import (DeterminismViolation, DuplicateLabel, FclError, NonAntichain, NonDeterministicMachine, ParseError,
                         SourceSpan, UnknownParticipant)
from core.fsa import Fsa
from core.gtypes import Comm, End, GlobalType, Process, Rec, Var, render_global, render_process, validate
from core.langset import ExplicitLanguage
from core.words import (EMPTY_WORD_TEXT, IDENTIFIER, Action, Interaction, Kind, Message, Order, Participant,
                        Word, upw_compare)

logger = logging.getLogger('fcl.core.parsers')

_NAME = r'[A-Za-z][A-Za-z0-9_]*'
_INTERACTION = re.compile(rf'({_NAME})->({_NAME}):({_NAME})\Z')
_ACTION = re.compile(rf'({_NAME})([!?])({_NAME})\Z')
EPSILON_TEXT = 'eps'


# --- Tokens ---
@dataclass(frozen=True)
class _Token:
    text: str
    span: SourceSpan


def _lines(text: str, file: str) -> Iterator[List[_Token]]:
    """Whitespace-separated tokens of every non-blank line; `#` starts a comment."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = []
        for match in re.finditer(r'\S+', raw):
            if match.group().startswith('#'):
                break
            tokens.append(_Token(match.group(), SourceSpan.token(file, lineno, match.start() + 1, match.group())))
        if tokens:
            yield tokens


def _end_span(text: str, file: str) -> SourceSpan:
    lines = text.splitlines() or ['']
    return SourceSpan.token(file, len(lines), len(lines[-1]) + 1, '')


def _expect_arity(tokens: List[_Token], arity: int, shape: str):
    if len(tokens) < arity:
        last = tokens[-1].span
        at = SourceSpan.token(last.file, last.line, last.end_column + 1, '')
        raise ParseError(f"incomplete line, expected `{shape}`", at, [shape])
    if len(tokens) > arity:
        raise ParseError(f"unexpected {tokens[arity].text!r}, expected `{shape}`", tokens[arity].span, ['end of line'])


def _identifier(token: _Token, kind: str) -> str:
    if not IDENTIFIER.match(token.text):
        raise ParseError(f"invalid {kind} name {token.text!r}", token.span, [kind])
    return token.text


def _interaction(token: _Token) -> Interaction:
    match = _INTERACTION.match(token.text)
    if not match:
        raise ParseError(f"expected an interaction, found {token.text!r}", token.span, ['A->B:m'])
    sender, receiver, msg = match.groups()
    if sender == receiver:
        raise ParseError(f"participant {sender} cannot communicate with itself", token.span)
    return Interaction.of(sender, receiver, msg)


def _local_action(token: _Token, subject: str) -> Action:
    """Action `AB!m` / `AB?m` of a declared subject; the subject fixes where the names split."""
    match = _ACTION.match(token.text)
    if match:
        names, kind, msg = match.groups()
        if kind == Kind.SEND.value and names.startswith(subject) and len(names) > len(subject):
            peer = names[len(subject):]
            if IDENTIFIER.match(peer) and peer != subject:
                return Action.send(subject, peer, msg)
        if kind == Kind.RECEIVE.value and names.endswith(subject) and len(names) > len(subject):
            peer = names[:-len(subject)]
            if IDENTIFIER.match(peer) and peer != subject:
                return Action.receive(peer, subject, msg)
    raise ParseError(f"expected an action of {subject}, found {token.text!r}", token.span,
                     [f"{subject}B!m", f"B{subject}?m"])


def _peer_action(token: _Token, owner: str) -> Optional[Action]:
    """`B!m` (owner sends m to B) or `B?m` (owner receives m from B) inside a machine block."""
    if token.text == EPSILON_TEXT:
        return None
    match = _ACTION.match(token.text)
    if not match:
        raise ParseError(f"expected an action, found {token.text!r}", token.span, ['B!m', 'B?m', EPSILON_TEXT])
    peer, kind, msg = match.groups()
    if peer == owner:
        raise ParseError(f"participant {owner} cannot communicate with itself", token.span)
    if kind == Kind.SEND.value:
        return Action.send(owner, peer, msg)
    return Action.receive(peer, owner, msg)


# --- Choreography Automata ---
def parse_ca(text: str, file: str = '<string>') -> ChorAutomaton:
    """`chaut <name>`, `init <state>`, then one `<state> A->B:m <state>` per line."""
    name, initial, edges = None, None, []
    seen: Dict[Tuple[str, Interaction], _Token] = {}
    for tokens in _lines(text, file):
        head = tokens[0]
        if head.text == 'chaut':
            _expect_arity(tokens, 2, 'chaut <name>')
            if name is not None or initial is not None or edges:
                raise ParseError("`chaut` must be the first line", head.span)
            name = _identifier(tokens[1], 'automaton')
        elif head.text == 'init':
            _expect_arity(tokens, 2, 'init <state>')
            if initial is not None:
                raise ParseError("initial state declared twice", head.span)
            initial = tokens[1].text
        else:
            _expect_arity(tokens, 3, '<state> A->B:m <state>')
            alpha = _interaction(tokens[1])
            if (head.text, alpha) in seen:
                raise DeterminismViolation(head.text, alpha, tokens[1].span)
            seen[(head.text, alpha)] = tokens[1]
            edges.append((head.text, alpha, tokens[2].text))
    if initial is None:
        raise ParseError("missing `init` line", _end_span(text, file), ['init'])
    logger.debug(f"Parsed c-automaton {name or 'A'} with {len(edges)} transitions from {file}")
    return ChorAutomaton(Fsa.build(initial, edges), name or 'A')


def serialise_ca(A: ChorAutomaton) -> str:
    lines = [f"chaut {A.name}", f"init {A.automaton.initial}"]
    lines += [f"{t.source} {t.label} {t.target}" for t in A.automaton.sorted_transitions()]
    return "\n".join(lines) + "\n"


# --- Communicating Systems ---
@dataclass
class _Block:
    owner: str
    header: _Token
    initial: Optional[str] = None
    edges: List[Tuple[str, Optional[Action], str]] = field(default_factory=list)


def parse_cfsm_system(text: str, file: str = '<string>') -> CfsmSystem:
    """Blocks of `cfsm <A>`, `init <state>` and `<state> B!m <state>` / `<state> B?m <state>` lines."""
    blocks: List[_Block] = []
    mentions: Dict[str, _Token] = {}
    seen = set()
    for tokens in _lines(text, file):
        head = tokens[0]
        if head.text == 'cfsm':
            _expect_arity(tokens, 2, 'cfsm <participant>')
            owner = _identifier(tokens[1], 'participant')
            if any(b.owner == owner for b in blocks):
                raise ParseError(f"machine {owner} declared twice", tokens[1].span)
            blocks.append(_Block(owner, tokens[1]))
            continue
        if not blocks:
            raise ParseError(f"unexpected {head.text!r} before the first machine", head.span, ['cfsm'])
        block = blocks[-1]
        if head.text == 'init':
            _expect_arity(tokens, 2, 'init <state>')
            if block.initial is not None:
                raise ParseError(f"initial state of {block.owner} declared twice", head.span)
            block.initial = tokens[1].text
            continue
        _expect_arity(tokens, 3, '<state> B!m <state>')
        action = _peer_action(tokens[1], block.owner)
        if action is None or (block.owner, head.text, action) in seen:
            raise NonDeterministicMachine(block.owner, head.text, action, tokens[1].span)
        seen.add((block.owner, head.text, action))
        mentions.setdefault(str(action.peer), tokens[1])
        block.edges.append((head.text, action, tokens[2].text))
    owners = {b.owner for b in blocks}
    for peer, token in sorted(mentions.items()):
        if peer not in owners:
            raise UnknownParticipant(peer, token.span)
    machines = {}
    for block in blocks:
        if block.initial is None:
            raise ParseError(f"machine {block.owner} has no `init` line", block.header.span, ['init'])
        owner = Participant(block.owner)
        machines[owner] = Cfsm(owner, Fsa.build(block.initial, block.edges))
    logger.debug(f"Parsed {len(machines)} machines from {file}")
    return CfsmSystem(machines)


def _peer_text(action: Optional[Action]) -> str:
    if action is None:
        return EPSILON_TEXT
    return f"{action.peer}{action.kind.value}{action.msg}"


def serialise_cfsm_system(S: CfsmSystem) -> str:
    blocks = []
    for A in S.participants:
        automaton = S[A].automaton
        lines = [f"cfsm {A}", f"init {automaton.initial}"]
        lines += [f"{t.source} {_peer_text(t.label)} {t.target}" for t in automaton.sorted_transitions()]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# --- Explicit Languages ---
def _parse_word(tokens: List[_Token], symbol: Callable[[_Token], object]) -> Word:
    """`eps`, `a . b`, `( a . b )^w` or `a . b ( c )^w`."""
    if len(tokens) == 1 and tokens[0].text == EMPTY_WORD_TEXT:
        return Word()
    prefix, cycle = [], []
    target = prefix
    expect_symbol = True
    closed = False
    for token in tokens:
        if closed:
            raise ParseError(f"unexpected {token.text!r} after the cycle", token.span, ['end of line'])
        if token.text == '(':
            if target is cycle:
                raise ParseError("unexpected `(`", token.span, ['symbol'])
            target, expect_symbol = cycle, True
        elif token.text == ')^w':
            if target is not cycle or expect_symbol:
                raise ParseError("unexpected `)^w`", token.span, ['symbol'])
            closed = True
        elif token.text == '.':
            if expect_symbol:
                raise ParseError("unexpected `.`", token.span, ['symbol'])
            expect_symbol = True
        else:
            if not expect_symbol:
                raise ParseError(f"unexpected {token.text!r}", token.span, ['.', '(', ')^w'])
            target.append(symbol(token))
            expect_symbol = False
    if target is cycle and not closed:
        raise ParseError("unterminated cycle", tokens[-1].span, [')^w'])
    if expect_symbol:
        raise ParseError("word ends with a separator", tokens[-1].span, ['symbol'])
    return Word(tuple(prefix), tuple(cycle))


def parse_glang(text: str, file: str = '<string>') -> ExplicitLanguage:
    """`max: <word>` and `loop: <u> ( <v> )^w` lines; a leading `subject: A` makes it a local language."""
    subject: Optional[str] = None
    generators: List[Tuple[Word, SourceSpan]] = []
    for tokens in _lines(text, file):
        head = tokens[0]
        if head.text == 'subject:':
            _expect_arity(tokens, 2, 'subject: <participant>')
            if subject is not None or generators:
                raise ParseError("`subject:` must be the first line", head.span)
            subject = _identifier(tokens[1], 'participant')
            continue
        if head.text not in ('max:', 'loop:'):
            raise ParseError(f"unexpected {head.text!r}", head.span, ['max:', 'loop:', 'subject:'])
        if len(tokens) == 1:
            raise ParseError("missing word", head.span, ['word'])
        symbol = _interaction if subject is None else (lambda token: _local_action(token, subject))
        w = _parse_word(tokens[1:], symbol)
        if head.text == 'max:' and w.is_lasso:
            raise ParseError("`max:` takes a finite word; use `loop:`", head.span, ['loop:'])
        if head.text == 'loop:' and w.is_finite:
            raise ParseError("`loop:` takes a word ending in `( v )^w`", head.span, ['max:'])
        span = SourceSpan(file, head.span.line, head.span.column, tokens[-1].span.end_line, tokens[-1].span.end_column)
        for other, other_span in generators:
            order = upw_compare(other, w)
            if order in (Order.EQUAL, Order.STRICT_PREFIX_OF_SECOND):
                raise NonAntichain(other, w, other_span, span)
            if order is Order.STRICT_PREFIX_OF_FIRST:
                raise NonAntichain(w, other, span, other_span)
        generators.append((w, span))
    owner = Participant(subject) if subject is not None else None
    logger.debug(f"Parsed {len(generators)} generators from {file}")
    return ExplicitLanguage(frozenset(w for w, _ in generators), owner)


def _word_line(w: Word) -> str:
    return f"{'loop' if w.is_lasso else 'max'}: {w}"


def serialise_glang(L: ExplicitLanguage) -> str:
    lines = [] if L.subject is None else [f"subject: {L.subject}"]
    lines += [_word_line(g) for g in L.sorted_generators()]
    return "\n".join(lines) + "\n"


# --- Global Types ---
GT_GRAMMAR = r"""
    ?start: gtype

    ?gtype: "end"                                      -> end
          | "rec" NAME "." gtype                       -> rec
          | NAME "->" NAME ":" "{" branch ("," branch)* "}"  -> comm
          | NAME "->" NAME ":" NAME "." gtype          -> single
          | NAME                                       -> var

    branch: NAME "." gtype

    NAME: /[A-Za-z][A-Za-z0-9_]*/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_gt_parser = Lark(GT_GRAMMAR, parser='lalr', propagate_positions=True)


def _token_span(file: str, token: Token) -> SourceSpan:
    return SourceSpan.token(file, token.line, token.column, str(token))


@v_args(meta=True)
class _GlobalTypeBuilder(Transformer):
    def __init__(self, file: str):
        super().__init__()
        self.file = file
        self.spans: Dict[int, SourceSpan] = {}

    def _comm(self, sender: Token, receiver: Token, branches: List[Tuple[Token, GlobalType]]) -> Comm:
        if str(sender) == str(receiver):
            raise ParseError(f"participant {sender} cannot communicate with itself", _token_span(self.file, receiver))
        labels = set()
        for label, _ in branches:
            if str(label) in labels:
                raise DuplicateLabel(str(label), _token_span(self.file, label))
            labels.add(str(label))
        return Comm(Participant(str(sender)), Participant(str(receiver)),
                    tuple((Message(str(label)), g) for label, g in branches))

    def end(self, meta, children):
        return End()

    def rec(self, meta, children):
        var, body = children
        return Rec(str(var), body)

    def var(self, meta, children):
        (name,) = children
        node = Var(str(name))
        self.spans[id(node)] = _token_span(self.file, name)
        return node

    def branch(self, meta, children):
        label, g = children
        return label, g

    def comm(self, meta, children):
        sender, receiver, *branches = children
        return self._comm(sender, receiver, branches)

    def single(self, meta, children):
        sender, receiver, label, g = children
        return self._comm(sender, receiver, [(label, g)])


def _syntax_error(err: UnexpectedInput, text: str, file: str) -> ParseError:
    if isinstance(err, UnexpectedEOF) or getattr(err, 'line', -1) < 1:
        return ParseError("unexpected end of input", _end_span(text, file), sorted(getattr(err, 'expected', ())))
    if isinstance(err, UnexpectedToken):
        found = str(err.token) or err.token.type
        return ParseError(f"unexpected {found!r}", SourceSpan.token(file, err.line, err.column, found),
                          sorted(err.accepts or err.expected))
    if isinstance(err, UnexpectedCharacters):
        found = text[err.pos_in_stream] if err.pos_in_stream < len(text) else ''
        return ParseError(f"unexpected character {found!r}", SourceSpan.token(file, err.line, err.column, found),
                          sorted(err.allowed or ()))
    return ParseError(str(err), SourceSpan.token(file, err.line, err.column, ''))


def parse_gt(text: str, file: str = '<string>') -> GlobalType:
    try:
        tree = _gt_parser.parse(text)
    except UnexpectedInput as err:
        raise _syntax_error(err, text, file) from None
    builder = _GlobalTypeBuilder(file)
    try:
        g = builder.transform(tree)
    except VisitError as err:
        raise err.orig_exc from None
    validate(g, lambda node: builder.spans.get(id(node)))
    return g


def serialise_gt(g: GlobalType) -> str:
    return render_global(g) + "\n"


def serialise_process(p: Process) -> str:
    return render_process(p) + "\n"


# --- Files ---
PARSERS: Dict[str, Callable[[str, str], object]] = {
    '.ca': parse_ca,
    '.cfsm': parse_cfsm_system,
    '.gt': parse_gt,
    '.gl': parse_glang,
    '.ll': parse_glang,
}


def load(path: str, suffixes: Optional[Tuple[str, ...]] = None):
    """Parse a file according to its extension, optionally restricted to some formats."""
    suffix = os.path.splitext(path)[1]
    allowed = tuple(PARSERS) if suffixes is None else suffixes
    if suffix not in allowed:
        raise ParseError(f"{path}: expected a {' or '.join(allowed)} file", None, list(allowed))
    with open(path, encoding='utf-8') as handle:
        text = handle.read()
    try:
        result = PARSERS[suffix](text, path)
    except FclError as err:
        if err.span is None:
            err.with_span(SourceSpan.token(path, 1, 1, ''))
        raise
    if suffix == '.ll' and result.subject is None:
        raise ParseError("local language files start with `subject: A`", SourceSpan.token(path, 1, 1, ''), ['subject:'])
    if suffix == '.gl' and result.subject is not None:
        raise ParseError("global language files have no `subject:` line", SourceSpan.token(path, 1, 1, ''))
    return result
