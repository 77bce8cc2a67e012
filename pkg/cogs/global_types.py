# ./fcl/cogs/global_types.py

import logging

import click

from core import cfsm, chaut, gtypes, parsers
from core.cli import (EXIT_OK, EXIT_VIOLATED, FclCli, budget_option, dot_option, echo_lines, input_file,
                      json_option, mode_option, report, write_dot)
from core.errors import ProjectionUndefined
from core.results import CfsmProperty

logger = logging.getLogger('fcl.cogs.global_types')


def _load(file: str) -> gtypes.GlobalType:
    return parsers.load(file, ('.gt',))


@click.group(name='gt')
def gt():
    """Global types: projection, transition system, conversion and checks."""


@gt.command(name='project')
@input_file
@mode_option
def gt_project(file: str, mode: str) -> int:
    """Print the projection on every participant; undefined projections exit with 1."""
    G = _load(file)
    code = EXIT_OK
    for X in gtypes.participants(G):
        try:
            click.echo(f"{X}: {gtypes.render_process(gtypes.proj_gt(G, X, mode))}")
        except ProjectionUndefined as err:
            click.echo(f"{X}: undefined ({err.reason.value})")
            code = EXIT_VIOLATED
    return code


@gt.command(name='lts')
@input_file
@dot_option
@budget_option
def gt_lts(file: str, dot_out: str, budget: int) -> int:
    """Reachable states of the global type and their transitions."""
    A = gtypes.gt_to_chaut(_load(file), budget)
    automaton = A.automaton
    echo_lines(f"{state} = {automaton.origin[state]}" for state in automaton.sorted_states())
    echo_lines(f"{t.source} {t.label} {t.target}" for t in automaton.sorted_transitions())
    write_dot(A, dot_out)
    return EXIT_OK


@gt.command(name='to-ca')
@input_file
@dot_option
@budget_option
def gt_to_ca(file: str, dot_out: str, budget: int) -> int:
    """The c-automaton of the global type in .ca format."""
    A = gtypes.gt_to_chaut(_load(file), budget)
    click.echo(parsers.serialise_ca(A), nl=False)
    write_dot(A, dot_out)
    return EXIT_OK


@gt.command(name='check')
@input_file
@mode_option
@json_option
@budget_option
def gt_check(file: str, mode: str, as_json: bool, budget: int) -> int:
    """Projectability, then CUI and branch-awareness of the language and lock-freedom of the session."""
    G = _load(file)
    try:
        M = gtypes.mps_of(G, mode)
    except ProjectionUndefined as err:
        click.echo(f"projection on {err.participant}: undefined ({err.reason.value})")
        return EXIT_VIOLATED
    A = gtypes.gt_to_chaut(G, budget)
    verdicts = [chaut.decide_cui(A, budget), chaut.decide_ba(A, budget=budget)]
    if M.participants:
        system = gtypes.mps_system(M)
        verdicts.append(cfsm.check_cfsm_property(system, CfsmProperty.LOCK_FREEDOM, budget))
    logger.debug(f"Checked {file} in {mode} mode")
    return report(verdicts, as_json)


def setup(cli: FclCli):
    cli.add_command(gt)
