# ./fcl/cogs/explore.py

import json
import logging

import click

import config
from core import cfsm, chaut, fsa, gtypes, langset, parsers
from core.cli import FclCli, budget_option, dot_option, echo_lines, input_file, json_option, max_len_option, write_dot
from core.emit import render_words, word_json

logger = logging.getLogger('fcl.cogs.explore')


@click.command(name='project')
@input_file
@dot_option
def project(file: str, dot_out: str) -> int:
    """Project a c-automaton on its machines, or a g-language on its local languages."""
    source = parsers.load(file, ('.ca', '.gl'))
    if isinstance(source, chaut.ChorAutomaton):
        system = chaut.project_chaut(source)
        click.echo(parsers.serialise_cfsm_system(system), nl=False)
        write_dot(system, dot_out)
        return 0
    if dot_out is not None:
        raise click.UsageError("--dot needs a .ca file")
    system = langset.project_language(source)
    blocks = [parsers.serialise_glang(system[A]) for A in system.participants]
    click.echo("\n".join(blocks), nl=False)
    return 0


@click.command(name='product')
@input_file
@dot_option
@budget_option
def product(file: str, dot_out: str, budget: int) -> int:
    """Synchronous product of a CFSM system (or of the projection of a .ca)."""
    source = parsers.load(file, ('.cfsm', '.ca'))
    system = chaut.project_chaut(source) if isinstance(source, chaut.ChorAutomaton) else source
    semantics = cfsm.sync_product(system, budget)
    click.echo(f"init {semantics.initial}")
    echo_lines(f"{t.source} {t.label} {t.target}" for t in semantics.sorted_transitions())
    write_dot(semantics, dot_out, 'product')
    return 0


@click.command(name='words')
@input_file
@max_len_option
@json_option
@budget_option
def words(file: str, max_len: int, as_json: bool, budget: int) -> int:
    """Words of the projected semantics up to --max-len."""
    source = parsers.load(file)
    if isinstance(source, chaut.ChorAutomaton):
        found, _ = fsa.enumerate_words(cfsm.sync_product(chaut.project_chaut(source), budget), max_len, 0)
    elif isinstance(source, cfsm.CfsmSystem):
        found, _ = fsa.enumerate_words(cfsm.sync_product(source, budget), max_len, 0)
    elif isinstance(source, langset.ExplicitLanguage):
        if source.subject is not None:
            raise click.UsageError("words needs a global language, not a local one")
        found = langset.sem_enumerate(langset.project_language(source), max_len)
    else:
        found = gtypes.gt_traces(source, max_len)
    found = sorted(found)
    logger.debug(f"{len(found)} words up to length {max_len}")
    if as_json:
        click.echo(json.dumps([word_json(w) for w in found], indent=config.JSON_INDENT))
    else:
        click.echo(render_words(found), nl=False)
    return 0


def setup(cli: FclCli):
    cli.add_command(project)
    cli.add_command(product)
    cli.add_command(words)
