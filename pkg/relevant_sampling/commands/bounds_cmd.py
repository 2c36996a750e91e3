"""Bounds command implementation."""

import click
from typing import Optional

from relevant_sampling.commands import report_errors
from relevant_sampling.core.bounds import BoundParams, bound_table, feasible_radius
from relevant_sampling.core.csvio import write_table_csv


def execute_bounds(
    R: float,
    d: int,
    nu: float,
    delta: float,
    epsilon: float,
    r: Optional[int] = None,
    alpha: float = 0.5,
    N: Optional[int] = None,
    N0: Optional[float] = None,
    a: Optional[float] = None,
    out: Optional[str] = None,
    verbose: bool = False
) -> None:
    """Print every bound for one parameter set and optionally write it as CSV."""
    with report_errors(verbose):
        params = BoundParams(R=R, d=d, nu=nu, delta=delta, epsilon=epsilon, r=r, alpha=alpha, N=N, N0=N0, a=a)
        rows = bound_table(params)

        click.echo(f"📊 Bounds for R={R:g}, d={d}, nu={nu:g}, delta={delta:g}, epsilon={epsilon:g}")
        click.echo(f"{'name':<24} {'value':>24}  status")
        for row in rows:
            click.echo(f"{row.name:<24} {row.value:>24.12g}  {row.status}")

        for row in rows:
            if row.name == "delta_feasible" and row.status == "infeasible":
                click.echo(
                    f"⚠️  delta={delta:g} is below the feasibility floor {row.value:.6g} for R={R:g}; "
                    f"B(R, delta) needs R >= {feasible_radius(delta):.4g}",
                    err=True,
                )
            if row.name == "required_samples" and row.status.startswith("covering"):
                click.echo("⚠️  The covering term dominates the sample count", err=True)

        if out:
            write_table_csv(["name", "value", "status"], [(row.name, row.value, row.status) for row in rows], out)
            if verbose:
                click.echo(f"💾 Wrote {out}")
