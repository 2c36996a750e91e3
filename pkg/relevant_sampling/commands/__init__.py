"""Commands module."""

import sys
from contextlib import contextmanager

import click

from relevant_sampling.core.exceptions import (
    ConfigError,
    InfeasibleTargetError,
    InvalidArgumentError,
    StatisticalFailureError,
    TheoremViolationError,
)

EXIT_FAILURE = 1
EXIT_USAGE = 2


@contextmanager
def report_errors(verbose: bool = False):
    """Turn library errors into a message on stderr and the matching exit code."""
    try:
        yield
    except ConfigError as e:
        click.echo(f"❌ Configuration error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    except InfeasibleTargetError as e:
        click.echo(f"❌ {e}", err=True)
        click.echo(f"💡 Tip: use delta_target >= {e.min_delta:.6g} or a larger R", err=True)
        sys.exit(EXIT_USAGE)
    except InvalidArgumentError as e:
        click.echo(f"❌ Invalid argument: {e}", err=True)
        sys.exit(EXIT_USAGE)
    except TheoremViolationError as e:
        click.echo(f"❌ Theorem violation: {e}", err=True)
        sys.exit(EXIT_FAILURE)
    except StatisticalFailureError as e:
        click.echo(f"❌ Statistical failure: {e}", err=True)
        sys.exit(EXIT_FAILURE)
    except OSError as e:
        click.echo(f"❌ File error: {e}", err=True)
        if verbose:
            import traceback
            click.echo(traceback.format_exc(), err=True)
        sys.exit(EXIT_USAGE)
