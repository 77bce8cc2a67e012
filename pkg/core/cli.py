# ./fcl/core/cli.py

import importlib
import logging
import os
from typing import Callable, Iterable, List, Optional, Sequence, Union

import click

import config
from core.emit import emit_dot, emit_report, render_verdict
from core.results import Verdict

logger = logging.getLogger('fcl.core.cli')

COGS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'cogs')

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_ERROR = 2


# --- Shared Options ---
def json_option(f: Callable) -> Callable:
    return click.option('--json', 'as_json', is_flag=True, help="Print the report as JSON.")(f)


def budget_option(f: Callable) -> Callable:
    return click.option('--budget', type=click.IntRange(min=1), envvar='FCL_BUDGET', default=config.STATE_BUDGET,
                        show_default=True, help="Maximum number of explored states.")(f)


def max_len_option(f: Callable) -> Callable:
    return click.option('--max-len', type=click.IntRange(min=0), default=config.DEFAULT_MAX_LEN,
                        show_default=True, help="Bound on word length.")(f)


def dot_option(f: Callable) -> Callable:
    return click.option('--dot', 'dot_out', type=click.Path(dir_okay=False, writable=True), default=None,
                        help="Also write the automaton as DOT to this file.")(f)


def mode_option(f: Callable) -> Callable:
    return click.option('--mode', type=click.Choice(['standard', 'generalised']), default=config.DEFAULT_MODE,
                        show_default=True, help="Projection of global types.")(f)


def input_file(f: Callable) -> Callable:
    return click.argument('file', type=click.Path(exists=True, dir_okay=False))(f)


# --- Output Helpers ---
def report(verdicts: Union[Verdict, Sequence[Verdict]], as_json: bool) -> int:
    """Print verdicts and turn them into an exit code."""
    many = not isinstance(verdicts, Verdict)
    items: List[Verdict] = list(verdicts) if many else [verdicts]
    if as_json:
        click.echo(emit_report(items if many else items[0]), nl=False)
    else:
        for verdict in items:
            click.echo(render_verdict(verdict), nl=False)
    return EXIT_OK if all(v.holds for v in items) else EXIT_VIOLATED


def write_dot(x, dot_out: Optional[str], name: Optional[str] = None):
    if dot_out is None:
        return
    with open(dot_out, 'w', encoding='utf-8') as handle:
        handle.write(emit_dot(x, name))
    logger.info(f"Wrote DOT to {dot_out}")


def echo_lines(lines: Iterable[str]):
    for line in lines:
        click.echo(line)


# --- Command Group ---
class FclCli(click.Group):
    """Top-level command group; verbs are contributed by the modules in cogs/."""

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.error_handler = None
        self.loaded_cogs: List[str] = []

    def load_cogs(self, cogs_dir: str = COGS_DIR):
        for filename in sorted(os.listdir(cogs_dir)):
            if filename.endswith(".py") and not filename.startswith("__"):
                cog_name = f"cogs.{filename[:-3]}"
                try:
                    module = importlib.import_module(cog_name)
                    module.setup(self)
                    self.loaded_cogs.append(cog_name)
                    logger.debug(f"Loaded cog {cog_name}")
                except Exception as e:
                    logger.exception(f"Failed to load cog '{cog_name}': {e}")
        logger.debug(f"Loaded {len(self.loaded_cogs)} cogs: {', '.join(self.loaded_cogs)}")


def build_cli() -> FclCli:
    cli = FclCli(name='fcl', help="Check realisability and communication properties of choreographies.")
    cli.load_cogs()
    return cli


def run(argv: Sequence[str]) -> int:
    """Run one command; 0 = holds, 1 = violated, 2 = usage, input or budget error."""
    cli = build_cli()
    try:
        result = cli.main(args=list(argv), prog_name='fcl', standalone_mode=False)
    except Exception as exc:
        if cli.error_handler is None:
            logger.error(f"Unhandled error: {exc}", exc_info=exc)
            return EXIT_ERROR
        return cli.error_handler.handle(exc)
    return result if isinstance(result, int) else EXIT_OK
