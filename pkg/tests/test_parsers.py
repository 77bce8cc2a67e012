import os
import random

import pytest

from core import parsers
from core.errors import (DeterminismViolation, DuplicateLabel, FclError, NonAntichain, NonDeterministicMachine,
                         ParseError, UnboundVariable, UnguardedRecursion, UnknownParticipant)
from core.gtypes import Comm, End, Rec, Var
from core.words import Action, Participant
from helpers import CORPUS, corpus_path, gw, load, lw


def _at(err):
    span = err.value.span
    return span.line, span.column


class TestChorAutomata:
    def test_parse(self):
        A = load('handshake.ca')
        assert A.name == 'handshake'
        assert A.automaton.initial == 'q0'
        assert A.accepts(gw('A->B:m'))

    def test_serialise(self):
        assert parsers.serialise_ca(load('handshake.ca')) == "chaut handshake\ninit q0\nq0 A->B:m q1\n"
        bad = load('bad.ca')
        assert parsers.parse_ca(parsers.serialise_ca(bad)) == bad

    def test_self_communication(self):
        with pytest.raises(ParseError) as err:
            parsers.parse_ca("init q0\nq0 A->A:m q1\n")
        assert _at(err) == (2, 4)

    def test_malformed_interaction(self):
        with pytest.raises(ParseError) as err:
            parsers.parse_ca("init q0\nq0 A-B:m q1\n")
        assert err.value.expected == ['A->B:m']

    def test_missing_init(self):
        with pytest.raises(ParseError) as err:
            parsers.parse_ca("chaut x\nq0 A->B:m q1\n")
        assert _at(err) == (2, 13)

    def test_extra_token(self):
        with pytest.raises(ParseError) as err:
            parsers.parse_ca("init q0 q1\n")
        assert _at(err) == (1, 9)

    def test_duplicate_transition(self):
        with pytest.raises(DeterminismViolation) as err:
            parsers.parse_ca("init q0\nq0 A->B:m q1\nq0 A->B:m q2\n")
        assert _at(err) == (3, 4)

    def test_comments_and_blank_lines(self):
        A = parsers.parse_ca("# header\n\ninit q0   # start\nq0 A->B:m q1\n")
        assert len(A.automaton.transitions) == 1


class TestCfsmSystems:
    def test_parse(self):
        S = load('handshake.cfsm')
        assert S.participants == (Participant('A'), Participant('B'))
        assert S[Participant('A')].automaton.labels == [Action.send('A', 'B', 'm')]

    def test_serialise(self):
        text = parsers.serialise_cfsm_system(load('handshake.cfsm'))
        assert text == "cfsm A\ninit q0\nq0 B!m q1\n\ncfsm B\ninit p0\np0 A?m p1\n"

    def test_silent_transitions_are_rejected(self):
        with pytest.raises(NonDeterministicMachine) as err:
            load('nondet.cfsm')
        assert _at(err) == (4, 4)
        assert err.value.label is None
        assert err.value.owner == 'A'

    def test_duplicate_action(self):
        with pytest.raises(NonDeterministicMachine):
            parsers.parse_cfsm_system("cfsm A\ninit q0\nq0 B!m q1\nq0 B!m q2\ncfsm B\ninit p0\n")

    def test_unknown_peer(self):
        with pytest.raises(UnknownParticipant) as err:
            parsers.parse_cfsm_system("cfsm A\ninit q0\nq0 B!m q1\n")
        assert _at(err) == (3, 4)

    def test_missing_init(self):
        with pytest.raises(ParseError) as err:
            parsers.parse_cfsm_system("cfsm A\nq0 B!m q1\ncfsm B\ninit p0\np0 A?m p1\n")
        assert _at(err) == (1, 6)

    def test_lines_before_first_machine(self):
        with pytest.raises(ParseError) as err:
            parsers.parse_cfsm_system("init q0\n")
        assert err.value.expected == ['cfsm']

    def test_talking_to_itself(self):
        with pytest.raises(ParseError):
            parsers.parse_cfsm_system("cfsm A\ninit q0\nq0 A!m q1\n")


class TestLanguages:
    def test_global(self):
        L = load('l0.gl')
        assert L.subject is None
        assert gw('C->A:w . A->B:g') in L.generators

    def test_local(self):
        L = load('l0_A.ll')
        assert L.subject == Participant('A')
        assert L.generators == {lw('A', 'CA?w . AB!g'), lw('A', 'AB!g')}

    def test_local_names_split_at_the_subject(self):
        (w,) = parsers.parse_glang("subject: Ab\nmax: AbC!m . DAb?n\n").generators
        assert w.prefix == (Action.send('Ab', 'C', 'm'), Action.receive('D', 'Ab', 'n'))

    def test_foreign_action(self):
        with pytest.raises(ParseError) as err:
            parsers.parse_glang("subject: A\nmax: BC!m\n")
        assert err.value.expected == ['AB!m', 'BA?m']
        assert _at(err) == (2, 6)

    def test_lassos(self):
        (w,) = parsers.parse_glang("loop: A->B:x ( C->D:n )^w\n").generators
        assert w.is_lasso
        assert str(w) == 'A->B:x ( C->D:n )^w'

    def test_empty_word(self):
        assert parsers.parse_glang("max: eps\n").generators == {gw('eps')}

    def test_generators_form_an_antichain(self):
        with pytest.raises(NonAntichain) as err:
            parsers.parse_glang("max: A->B:m\nmax: A->B:m . B->C:n\n")
        assert err.value.first == gw('A->B:m')
        assert err.value.second == gw('A->B:m . B->C:n')
        assert err.value.span.line == 1
        assert err.value.other_span.line == 2

    def test_repeated_generator(self):
        with pytest.raises(NonAntichain):
            parsers.parse_glang("max: A->B:m\nmax: A->B:m\n")

    @pytest.mark.parametrize('text', [
        "max: ( A->B:m )^w\n",
        "loop: A->B:m\n",
        "max: A->B:m .\n",
        "max: A->B:m ( C->D:n\n",
        "max: A->B:m C->D:n\n",
        "max: . A->B:m\n",
        "loop: ( A->B:m )^w C->D:n\n",
        "max:\n",
        "word: A->B:m\n",
        "max: A->B:m\nsubject: A\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parsers.parse_glang(text)

    def test_serialise(self):
        assert parsers.serialise_glang(load('l0_A.ll')) == "subject: A\nmax: AB!g\nmax: CA?w . AB!g\n"
        assert parsers.serialise_glang(load('lfnotslf.gl')) == "loop: ( C->D:n )^w\nloop: A->B:x ( C->D:n )^w\n"


class TestGlobalTypes:
    def test_parse(self):
        assert parsers.parse_gt("A->B:m . end") == Comm.of('A', 'B', ('m', End()))
        assert parsers.parse_gt("rec t . A->B:{ m . t, s . end }") == \
            Rec('t', Comm.of('A', 'B', ('m', Var('t')), ('s', End())))

    def test_comments_and_layout(self):
        assert load('delegation.gt') == parsers.parse_gt(
            "A->B:{ go . B->C:job . C->A:done . end, stop . B->C:quit . end }")

    def test_duplicate_label(self):
        with pytest.raises(DuplicateLabel) as err:
            parsers.parse_gt("A->B:{ m . end, m . end }")
        assert _at(err) == (1, 17)

    def test_unguarded(self):
        with pytest.raises(UnguardedRecursion) as err:
            parsers.parse_gt("rec t . t")
        assert _at(err) == (1, 9)

    def test_unbound(self):
        with pytest.raises(UnboundVariable) as err:
            parsers.parse_gt("A->B:m . x")
        assert _at(err) == (1, 10)

    def test_self_communication(self):
        with pytest.raises(ParseError):
            parsers.parse_gt("A->A:m . end")

    @pytest.mark.parametrize('text', ["A->B:m . ", "A->B:m . end end", "A->B:{ }", "A->B m . end", "A->B:m . end $"])
    def test_syntax_errors(self, text):
        with pytest.raises(ParseError) as err:
            parsers.parse_gt(text)
        assert err.value.span is not None

    def test_serialise(self):
        assert parsers.serialise_gt(load('loop.gt')) == "rec t . A->B:{ m . t, s . end }\n"
        G = load('nested.gt')
        assert parsers.parse_gt(parsers.serialise_gt(G)) == G


class TestLoad:
    def test_dispatch_by_suffix(self):
        assert parsers.load(corpus_path('handshake.gt')) == Comm.of('A', 'B', ('m', End()))

    def test_restricted_suffixes(self):
        with pytest.raises(ParseError) as err:
            parsers.load(corpus_path('handshake.ca'), ('.gt',))
        assert err.value.span is None

    def test_local_files_need_a_subject(self, tmp_path):
        path = tmp_path / 'plain.ll'
        path.write_text("max: A->B:m\n")
        with pytest.raises(ParseError):
            parsers.load(str(path))

    def test_global_files_have_no_subject(self, tmp_path):
        path = tmp_path / 'local.gl'
        path.write_text("subject: A\nmax: AB!m\n")
        with pytest.raises(ParseError):
            parsers.load(str(path))

    def test_errors_name_the_file(self, tmp_path):
        path = tmp_path / 'broken.ca'
        path.write_text("init q0\nq0 A->A:m q1\n")
        with pytest.raises(ParseError) as err:
            parsers.load(str(path))
        assert str(err.value).startswith(f"{path}:2:4: ")


SERIALISERS = {
    '.ca': parsers.serialise_ca,
    '.cfsm': parsers.serialise_cfsm_system,
    '.gt': parsers.serialise_gt,
    '.gl': parsers.serialise_glang,
    '.ll': parsers.serialise_glang,
}

# nondet.cfsm is rejected on purpose
CORPUS_FILES = sorted(name for name in os.listdir(CORPUS)
                      if os.path.splitext(name)[1] in SERIALISERS and name != 'nondet.cfsm')

NOISE = ' .:->!?(){}#,\n'


def _mutate(text: str, rng: random.Random) -> str:
    if not text:
        return rng.choice(NOISE)
    at = rng.randrange(len(text))
    choice = rng.randrange(4)
    if choice == 0:
        return text[:at] + text[at + 1:]
    if choice == 1:
        return text[:at] + rng.choice(NOISE) + text[at:]
    if choice == 2:
        lines = text.splitlines(keepends=True)
        k = rng.randrange(len(lines))
        return ''.join(lines[:k + 1] + lines[k:])
    tokens = text.split(' ')
    k = rng.randrange(len(tokens))
    tokens[k], tokens[-1 - k] = tokens[-1 - k], tokens[k]
    return ' '.join(tokens)


class TestCorpus:
    @pytest.mark.parametrize('name', CORPUS_FILES)
    def test_serialised_form_reads_back(self, name):
        suffix = os.path.splitext(name)[1]
        x = load(name)
        text = SERIALISERS[suffix](x)
        again = parsers.PARSERS[suffix](text, name)
        assert again == x
        assert SERIALISERS[suffix](again) == text

    @pytest.mark.parametrize('seed', range(10))
    def test_damaged_input_is_rejected_cleanly(self, seed):
        rng = random.Random(seed)
        for name in CORPUS_FILES + ['nondet.cfsm']:
            parse = parsers.PARSERS[os.path.splitext(name)[1]]
            with open(corpus_path(name), encoding='utf-8') as handle:
                text = handle.read()
            for _ in range(5):
                text = _mutate(text, rng)
                try:
                    parse(text, name)
                except FclError:
                    pass
