# ./fcl/cogs/checks.py

import logging
from typing import Optional, Tuple

import click

from core import cfsm, chaut, langset, parsers
from core.cli import FclCli, budget_option, input_file, json_option, max_len_option, report
from core.words import Participant

logger = logging.getLogger('fcl.cogs.checks')

LANGUAGE_FILES = ('.ca', '.gl')


@click.group(name='check')
def check():
    """Decide a property of a c-automaton, a language or a system."""


@check.command(name='cui')
@input_file
@json_option
@budget_option
def check_cui(file: str, as_json: bool, budget: int) -> int:
    """Closure under unknown information (.ca or .gl)."""
    source = parsers.load(file, LANGUAGE_FILES)
    if isinstance(source, chaut.ChorAutomaton):
        verdict = chaut.decide_cui(source, budget)
    else:
        verdict = langset.check_cui(source, budget)
    return report(verdict, as_json)


@check.command(name='ba')
@input_file
@click.option('--participant', '-p', 'names', multiple=True, help="Only check these participants.")
@json_option
@budget_option
def check_ba(file: str, names: Tuple[str, ...], as_json: bool, budget: int) -> int:
    """Branch-awareness (.ca or .gl)."""
    source = parsers.load(file, LANGUAGE_FILES)
    if isinstance(source, chaut.ChorAutomaton):
        chosen = [Participant(name) for name in names] or None
        verdict = chaut.decide_ba(source, chosen, budget)
    else:
        if names:
            raise click.UsageError("--participant only applies to .ca files")
        verdict = langset.check_ba(source)
    return report(verdict, as_json)


@check.command(name='props')
@input_file
@json_option
@budget_option
@click.option('--max-len', type=click.IntRange(min=0), default=None,
              help="Bound the maximal words of cyclic machines; the verdict then covers only those words.")
def check_props(file: str, as_json: bool, budget: int, max_len: Optional[int]) -> int:
    """The five communication properties of the projected (or given) system."""
    source = parsers.load(file, ('.gl', '.ca', '.cfsm'))
    if isinstance(source, chaut.ChorAutomaton):
        system = cfsm.to_explicit(chaut.project_chaut(source), max_len)
    elif isinstance(source, cfsm.CfsmSystem):
        system = cfsm.to_explicit(source, max_len)
    else:
        system = langset.project_language(source)
    verdicts = langset.check_properties(system, budget)
    return report(list(verdicts.values()), as_json)


@check.command(name='cfsm-props')
@input_file
@json_option
@budget_option
def check_cfsm_props(file: str, as_json: bool, budget: int) -> int:
    """Liveness, lock- and deadlock-freedom of a CFSM system (or the projection of a .ca)."""
    source = parsers.load(file, ('.cfsm', '.ca'))
    system = chaut.project_chaut(source) if isinstance(source, chaut.ChorAutomaton) else source
    verdicts = cfsm.check_cfsm_properties(system, budget)
    return report(list(verdicts.values()), as_json)


@check.command(name='realise')
@input_file
@json_option
@budget_option
@max_len_option
def check_realise(file: str, as_json: bool, budget: int, max_len: int) -> int:
    """Compare a c-automaton with the semantics of its projection up to --max-len."""
    A = parsers.load(file, ('.ca',))
    result = chaut.check_realisation(A, max_len, budget)
    logger.debug(f"Realisation of {A.name}: {len(result.rejected)} rejected words")
    return report(result.to_verdict(), as_json)


def setup(cli: FclCli):
    cli.add_command(check)
