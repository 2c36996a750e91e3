"""Main CLI interface for relevant-sampling."""

import sys
from dataclasses import asdict
from pathlib import Path

import click

from relevant_sampling import __version__
from relevant_sampling.commands import EXIT_USAGE
from relevant_sampling.commands.basis_cmd import execute_basis
from relevant_sampling.commands.bounds_cmd import execute_bounds
from relevant_sampling.commands.campaign_cmd import execute_campaign
from relevant_sampling.commands.pp_check_cmd import execute_pp_check
from relevant_sampling.commands.reconstruct_cmd import execute_reconstruct
from relevant_sampling.core.config import ConfigLoader, get_config
from relevant_sampling.core.exceptions import ConfigError


def _verbose(ctx) -> bool:
    return ctx.obj.get('verbose', False) if ctx.obj else False


@click.group()
@click.version_option(version=__version__)
@click.option(
    "--verbose", "-v", is_flag=True, help="Enable verbose output"
)
@click.pass_context
def main(ctx, verbose):
    """Random sampling of band-limited functions: prolate bases, bounds and Monte Carlo checks."""
    ctx.ensure_object(dict)
    ctx.obj['verbose'] = verbose


@main.command()
@click.option("--R", "R", type=float, required=True, help="Side length of the time cube C_R")
@click.option("--d", "d", type=int, default=1, show_default=True, help="Dimension")
@click.option("--N", "N", type=int, help="Truncation level (default: R^d)")
@click.option("--quad-order", type=int, help="Quadrature order (default: ceil(4R)+30)")
@click.option("--out", "-o", help="Write the eigenvalues as CSV")
@click.pass_context
def basis(ctx, R, d, N, quad_order, out):
    """Compute prolate eigenvalues and check the half-point property."""
    execute_basis(R=R, d=d, N=N, quad_order=quad_order, out=out, verbose=_verbose(ctx))


@main.command()
@click.option("--R", "R", type=float, required=True, help="Side length of the time cube C_R")
@click.option("--d", "d", type=int, default=1, show_default=True, help="Dimension")
@click.option("--r", "r", type=int, help="Sample count (default: from the sample-count formula)")
@click.option("--nu", type=float, required=True, help="Deviation level nu")
@click.option("--delta", type=float, required=True, help="Concentration deficit delta")
@click.option("--epsilon", type=float, required=True, help="Failure probability epsilon")
@click.option("--alpha", type=float, default=0.5, show_default=True, help="Eigenvalue level alpha")
@click.option("--N", "N", type=int, help="Truncation level (default: R^d)")
@click.option("--N0", "N0", type=float, help="Covering index (default: a*r)")
@click.option("--a", "a", type=float, help="Covering threshold (default: 3R^-d)")
@click.option("--out", "-o", help="Write the table as CSV")
@click.pass_context
def bounds(ctx, R, d, r, nu, delta, epsilon, alpha, N, N0, a, out):
    """Print every probability bound, constant and hypothesis."""
    execute_bounds(
        R=R, d=d, nu=nu, delta=delta, epsilon=epsilon, r=r, alpha=alpha,
        N=N, N0=N0, a=a, out=out, verbose=_verbose(ctx),
    )


def _campaign_options(func):
    func = click.option("--workers", "-w", type=int, help="Worker processes (overrides config)")(func)
    func = click.option("--seed", type=int, help="Base seed (overrides config)")(func)
    func = click.option("--out", "-o", help="Per-trial CSV output")(func)
    func = click.option("--config", "-c", "config_path", required=True,
                        type=click.Path(exists=True, dir_okay=False), help="Experiment YAML file")(func)
    return func


@main.command("mc-v1")
@_campaign_options
@click.pass_context
def mc_v1(ctx, config_path, out, seed, workers):
    """Monte Carlo frequency of the frame deviation event."""
    execute_campaign("v1", config_path, out=out, seed=seed, workers=workers, verbose=_verbose(ctx))


@main.command("mc-sampling")
@_campaign_options
@click.pass_context
def mc_sampling(ctx, config_path, out, seed, workers):
    """Monte Carlo frequency of the sampling-inequality failure."""
    execute_campaign("sampling", config_path, out=out, seed=seed, workers=workers, verbose=_verbose(ctx))


@main.command("mc-cover")
@_campaign_options
@click.option("--a", "a", type=float, help="Covering threshold (default: 3R^-d)")
@click.pass_context
def mc_cover(ctx, config_path, out, seed, workers, a):
    """Monte Carlo frequency of a large covering index."""
    execute_campaign("cover", config_path, out=out, seed=seed, workers=workers, a=a, verbose=_verbose(ctx))


@main.command()
@click.option("--config", "-c", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Experiment YAML file")
@click.option("--out", "-o", help="Recovered coefficients CSV")
@click.option("--seed", type=int, help="Base seed (overrides config)")
@click.option("--samples", "samples_path", type=click.Path(exists=True, dir_okay=False), help="Sample CSV")
@click.option("--values", "values_path", type=click.Path(exists=True, dir_okay=False), help="Value CSV")
@click.pass_context
def reconstruct(ctx, config_path, out, seed, samples_path, values_path):
    """Least-squares recovery of the P_N component from samples."""
    execute_reconstruct(
        config_path, out=out, seed=seed, samples_path=samples_path,
        values_path=values_path, verbose=_verbose(ctx),
    )


@main.command("pp-check")
@click.option("--config", "-c", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Experiment YAML file")
@click.option("--out", "-o", help="Report CSV")
@click.option("--seed", type=int, help="Base seed (overrides config)")
@click.option("--samples", "samples_path", type=click.Path(exists=True, dir_okay=False), help="Sample CSV")
@click.option("--cluster", is_flag=True, help="Cluster all samples around the maximum of |f|")
@click.pass_context
def pp_check(ctx, config_path, out, seed, samples_path, cluster):
    """Check the Plancherel-Polya inequality on one seeded function."""
    execute_pp_check(
        config_path, out=out, seed=seed, samples_path=samples_path,
        cluster=cluster, verbose=_verbose(ctx),
    )


@main.group()
def config():
    """Configuration management commands."""
    pass


@config.command()
@click.argument("key")
@click.argument("value")
def set(key, value):
    """Set configuration value."""
    try:
        config_loader = ConfigLoader()
        config_loader.set_value(key, value)

        # Save to global config
        config_loader.save_config()

        click.echo(f"✅ Set {key} = {value}")
    except ConfigError as e:
        click.echo(f"❌ Configuration error: {e}", err=True)
        sys.exit(EXIT_USAGE)


@config.command()
@click.argument("key", required=False)
def get(key):
    """Get configuration value(s)."""
    try:
        if key:
            value = ConfigLoader().get_value(key)
            click.echo(f"{key} = {value}")
        else:
            click.echo("📋 Current Configuration:")
            for section, values in asdict(get_config()).items():
                for name, value in values.items():
                    click.echo(f"  {section}.{name} = {value}")
    except ConfigError as e:
        click.echo(f"❌ Configuration error: {e}", err=True)
        sys.exit(EXIT_USAGE)


@config.command()
def init():
    """Initialize configuration file."""
    try:
        config_path = Path.home() / ".relevant-sampling" / "config.yaml"

        if config_path.exists():
            if not click.confirm(f"Configuration file already exists at {config_path}. Overwrite?"):
                click.echo("❌ Initialization cancelled.")
                return

        config_loader = ConfigLoader()
        config_loader.save_config(config_path)

        click.echo(f"✅ Configuration initialized at {config_path}")
        click.echo("💡 You can now tune settings with:")
        click.echo("   relsamp config set runtime.workers 4")

    except ConfigError as e:
        click.echo(f"❌ Failed to initialize configuration: {e}", err=True)
        sys.exit(EXIT_USAGE)


if __name__ == "__main__":
    main()
