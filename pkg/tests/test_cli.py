import json
import os

import pytest

from core.cli import EXIT_ERROR, EXIT_OK, EXIT_VIOLATED, build_cli, run
from core.parsers import PARSERS
from helpers import corpus_path


def fcl(capsys, *args):
    """Run a command; bare file names refer to the corpus."""
    argv = [corpus_path(a) if os.path.splitext(a)[1] in PARSERS and os.sep not in a else a for a in args]
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestCogs:
    def test_verbs_are_registered(self):
        cli = build_cli()
        assert {'check', 'project', 'product', 'words', 'gt'} <= set(cli.commands)
        assert cli.error_handler is not None

    def test_help(self, capsys):
        code, out, _ = fcl(capsys, '--help')
        assert code == EXIT_OK
        assert 'check' in out

    def test_unknown_verb(self, capsys):
        code, _, err = fcl(capsys, 'frobnicate')
        assert code == EXIT_ERROR
        assert 'frobnicate' in err


class TestCheck:
    def test_cui_violated(self, capsys):
        code, out, _ = fcl(capsys, 'check', 'cui', 'l0.gl')
        assert code == EXIT_VIOLATED
        assert out.splitlines()[0] == 'cui: violated'

    def test_cui_holds(self, capsys):
        assert fcl(capsys, 'check', 'cui', 'handshake.ca')[:2] == (EXIT_OK, 'cui: holds\n')

    def test_ba_json(self, capsys):
        code, out, _ = fcl(capsys, 'check', 'ba', 'closnodl.ca', '--json')
        assert code == EXIT_VIOLATED
        assert json.loads(out)['witness']['participant'] == 'B'

    def test_ba_participant_filter(self, capsys):
        code, out, _ = fcl(capsys, 'check', 'ba', 'selfloop_ba.ca', '-p', 'C')
        assert code == EXIT_VIOLATED
        assert '  (only found with both runs in the same state)' in out.splitlines()

    def test_ba_participant_filter_needs_automaton(self, capsys):
        assert fcl(capsys, 'check', 'ba', 'l0.gl', '-p', 'A')[0] == EXIT_ERROR

    def test_props(self, capsys):
        code, out, _ = fcl(capsys, 'check', 'props', 'closnodl.gl')
        assert code == EXIT_VIOLATED
        assert 'HA: holds' in out.splitlines()
        assert 'DF: violated' in out.splitlines()

    def test_props_of_machines(self, capsys):
        assert fcl(capsys, 'check', 'props', 'handshake.cfsm')[0] == EXIT_OK

    def test_cfsm_props(self, capsys):
        code, out, _ = fcl(capsys, 'check', 'cfsm-props', 'deadlock.cfsm')
        assert code == EXIT_VIOLATED
        assert 'DeadlockFreedom: violated' in out.splitlines()
        assert '  configuration: A:q0,B:p0' in out.splitlines()

    def test_cfsm_props_of_projection(self, capsys):
        code, out, _ = fcl(capsys, 'check', 'cfsm-props', 'closnodl.ca', '--json')
        assert code == EXIT_VIOLATED
        assert [item['check'] for item in json.loads(out)] == ['Liveness', 'LockFreedom', 'DeadlockFreedom']

    def test_realise(self, capsys):
        code, out, _ = fcl(capsys, 'check', 'realise', 'bad.ca', '--max-len', '3')
        assert code == EXIT_VIOLATED
        assert '  counterexample: C->B:r' in out.splitlines()
        assert fcl(capsys, 'check', 'realise', 'handshake.ca')[0] == EXIT_OK

    def test_wrong_file_kind(self, capsys):
        code, _, err = fcl(capsys, 'check', 'cui', 'handshake.gt')
        assert code == EXIT_ERROR
        assert err.startswith('parse error: ')


class TestExplore:
    def test_project_automaton(self, capsys):
        code, out, _ = fcl(capsys, 'project', 'handshake.ca')
        assert code == EXIT_OK
        assert out == "cfsm A\ninit {q0}\n{q0} B!m {q1}\n\ncfsm B\ninit {q0}\n{q0} A?m {q1}\n"

    def test_project_language(self, capsys):
        code, out, _ = fcl(capsys, 'project', 'l0.gl')
        assert code == EXIT_OK
        assert out.startswith("subject: A\nmax: AB!g\nmax: CA?w . AB!g\n\nsubject: B\n")

    def test_project_dot(self, capsys, tmp_path):
        target = tmp_path / 'bad.dot'
        assert fcl(capsys, 'project', 'bad.ca', '--dot', str(target))[0] == EXIT_OK
        assert target.read_text().count('digraph ') == 4
        assert fcl(capsys, 'project', 'l0.gl', '--dot', str(target))[0] == EXIT_ERROR

    def test_product(self, capsys):
        code, out, _ = fcl(capsys, 'product', 'handshake.cfsm')
        assert code == EXIT_OK
        assert out == "init A:q0,B:p0\nA:q0,B:p0 A->B:m A:q1,B:p1\n"

    def test_words_of_global_type(self, capsys):
        code, out, _ = fcl(capsys, 'words', 'out_of_order.gt', '--max-len', '2')
        assert code == EXIT_OK
        assert out == "eps\nA->B:m\nC->D:n\nA->B:m . C->D:n\nC->D:n . A->B:m\n"

    def test_words_json(self, capsys):
        code, out, _ = fcl(capsys, 'words', 'l0.gl', '--max-len', '3', '--json')
        assert code == EXIT_OK
        assert len(json.loads(out)) == 8

    def test_words_of_local_language(self, capsys):
        assert fcl(capsys, 'words', 'l0_A.ll')[0] == EXIT_ERROR


class TestGlobalTypes:
    def test_project(self, capsys):
        code, out, _ = fcl(capsys, 'gt', 'project', 'mixed.gt')
        assert code == EXIT_VIOLATED
        assert out.splitlines() == ['A: B!{ l . 0, r . 0 }', 'B: A?{ l . 0, r . 0 }',
                                    'C: undefined (MixedDirections)', 'D: C?{ x . 0, y . 0 }']

    def test_project_generalised(self, capsys):
        code, out, _ = fcl(capsys, 'gt', 'project', 'mixed.gt', '--mode', 'generalised')
        assert code == EXIT_OK
        assert 'C: D!{ x . 0, y . 0 }' in out.splitlines()

    def test_lts(self, capsys):
        code, out, _ = fcl(capsys, 'gt', 'lts', 'merge.gt')
        assert code == EXIT_OK
        assert out.splitlines()[0] == 'q0 = A->B:{ l . B->C:x . end, r . B->C:y . end }'
        assert 'q0 A->B:l q1' in out.splitlines()

    def test_to_ca(self, capsys, tmp_path):
        target = tmp_path / 'handshake.dot'
        code, out, _ = fcl(capsys, 'gt', 'to-ca', 'handshake.gt', '--dot', str(target))
        assert code == EXIT_OK
        assert out == "chaut G\ninit q0\nq0 A->B:m q1\n"
        assert target.read_text().startswith('digraph "G" {')

    def test_check(self, capsys):
        code, out, _ = fcl(capsys, 'gt', 'check', 'merge.gt')
        assert (code, out) == (EXIT_OK, "cui: holds\nba: holds\nLockFreedom: holds\n")

    def test_check_unprojectable(self, capsys):
        code, out, _ = fcl(capsys, 'gt', 'check', 'mixed.gt')
        assert (code, out) == (EXIT_VIOLATED, "projection on C: undefined (MixedDirections)\n")

    def test_check_generalised(self, capsys):
        code, out, _ = fcl(capsys, 'gt', 'check', 'mixed.gt', '--mode', 'generalised')
        assert code == EXIT_VIOLATED
        assert out.splitlines()[0] == 'cui: violated'

    def test_check_end(self, capsys):
        assert fcl(capsys, 'gt', 'check', 'end.gt')[:2] == (EXIT_OK, "cui: holds\nba: holds\n")


class TestErrors:
    def test_budget_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv('FCL_BUDGET', '20')
        code, _, err = fcl(capsys, 'gt', 'lts', 'streams.gt')
        assert code == EXIT_ERROR
        assert err.startswith('budget error: ')

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = fcl(capsys, 'check', 'cui', str(tmp_path / 'absent.ca'))
        assert code == EXIT_ERROR

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / 'broken.ca'
        path.write_text("init q0\nq0 A->A:m q1\n")
        code, out, err = fcl(capsys, 'check', 'cui', str(path))
        assert (code, out) == (EXIT_ERROR, '')
        assert err.startswith(f"parse error: {path}:2:4: ")

    def test_invalid_machine(self, capsys):
        code, _, err = fcl(capsys, 'check', 'cfsm-props', 'nondet.cfsm')
        assert code == EXIT_ERROR
        assert err.startswith('invalid input: ')

    def test_non_antichain(self, capsys, tmp_path):
        path = tmp_path / 'prefix.gl'
        path.write_text("max: A->B:m\nmax: A->B:m . B->C:n\n")
        code, _, err = fcl(capsys, 'check', 'cui', str(path))
        assert code == EXIT_ERROR
        assert f"  other generator at {path}:2:1" in err.splitlines()

    def test_conversion_does_not_project(self, capsys):
        code, _, err = fcl(capsys, 'gt', 'to-ca', 'unbounded.gt')
        assert code == EXIT_OK
        assert err == ''

    def test_independent_loops_report_a_budget_error(self, capsys):
        code, out, err = fcl(capsys, 'gt', 'check', 'streams.gt')
        assert (code, out) == (EXIT_ERROR, '')
        assert err.startswith('budget error: ')

    def test_branching_loops_need_a_bound(self, capsys):
        code, _, err = fcl(capsys, 'check', 'props', 'ping_pong.ca')
        assert code == EXIT_ERROR
        assert err.splitlines()[0].startswith('budget error: ')
        assert '  hint: rerun with --max-len N to bound the maximal words' in err.splitlines()
        assert fcl(capsys, 'check', 'props', 'ping_pong.ca', '--max-len', '6')[0] in (EXIT_OK, EXIT_VIOLATED)


CA_FILES = ['bad.ca', 'closnodl.ca', 'handshake.ca', 'l0.ca', 'ping_pong.ca', 'selfloop_ba.ca']

JSON_COMMANDS = [('check', 'cui', name) for name in CA_FILES + ['closnodl.gl', 'l0.gl', 'handshake.gl']] + \
    [('check', 'ba', name) for name in CA_FILES + ['closnodl.gl', 'l0.gl']] + \
    [('check', 'props', name) for name in ['closnodl.gl', 'dfnotlf.gl', 'lfnotslf.gl', 'handshake.cfsm']] + \
    [('check', 'cfsm-props', name) for name in ['deadlock.cfsm', 'dfnotlf.cfsm', 'bad.ca', 'closnodl.ca']] + \
    [('check', 'realise', name) for name in CA_FILES] + \
    [('gt', 'check', name) for name in ['merge.gt', 'delegation.gt', 'nested.gt']] + \
    [('gt', 'check', 'mixed.gt', '--mode', 'generalised')] + \
    [('words', name) for name in ['l0.gl', 'out_of_order.gt']]


class TestCorpus:
    @pytest.mark.parametrize('args', JSON_COMMANDS, ids=' '.join)
    def test_json_is_stable(self, capsys, args):
        code, first, _ = fcl(capsys, *args, '--json')
        again = fcl(capsys, *args, '--json')
        assert code in (EXIT_OK, EXIT_VIOLATED)
        assert again[:2] == (code, first)
        json.loads(first)

    @pytest.mark.parametrize('name', CA_FILES)
    def test_realisable_exactly_when_closed(self, capsys, name):
        closed = fcl(capsys, 'check', 'cui', name)[0]
        realised = fcl(capsys, 'check', 'realise', name)[0]
        assert closed in (EXIT_OK, EXIT_VIOLATED)
        assert realised == closed
