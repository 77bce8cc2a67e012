# ./fcl/cogs/error_handler.py

import logging

import click

from core.cli import EXIT_ERROR, FclCli
from core.errors import (FclError, InfiniteAntichain, NonAntichain, ParseError, ProjectionUndefined, StateBudgetExceeded,
                         ValidationError)

logger = logging.getLogger('fcl.cogs.error_handler')


class ErrorHandler:
    """Turns exceptions escaping a command into diagnostics on stderr and an exit code."""

    def __init__(self, cli: FclCli):
        self.cli = cli
        cli.error_handler = self
        logger.debug("ErrorHandler attached.")

    def handle(self, error: BaseException) -> int:
        # Usage errors: bad verb, missing file, wrong option value
        if isinstance(error, click.ClickException):
            error.show()
        elif isinstance(error, click.exceptions.Abort):
            click.echo("Aborted.", err=True)
        elif isinstance(error, ParseError):
            click.echo(f"parse error: {error}", err=True)
        elif isinstance(error, NonAntichain):
            click.echo(f"invalid input: {error}", err=True)
            if error.other_span is not None:
                click.echo(f"  other generator at {error.other_span}", err=True)
        elif isinstance(error, ValidationError):
            click.echo(f"invalid input: {error}", err=True)
        elif isinstance(error, InfiniteAntichain):
            click.echo(f"budget error: {error}", err=True)
            click.echo("  hint: rerun with --max-len N to bound the maximal words", err=True)
        elif isinstance(error, StateBudgetExceeded):
            click.echo(f"budget error: {error}", err=True)
        elif isinstance(error, ProjectionUndefined):
            click.echo(f"projection error: {error}", err=True)
        elif isinstance(error, FclError):
            logger.error(f"Unhandled toolkit error: {error}", exc_info=error)
            click.echo(f"error: {error}", err=True)
        elif isinstance(error, OSError):
            click.echo(f"error: {error}", err=True)
        else:
            logger.error(f"Unexpected error: {error}", exc_info=error)
            click.echo(f"internal error: {error}", err=True)
        return EXIT_ERROR


def setup(cli: FclCli):
    ErrorHandler(cli)
