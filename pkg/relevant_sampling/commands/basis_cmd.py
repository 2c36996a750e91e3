"""Basis command implementation."""

import click
from typing import Optional

from relevant_sampling.commands import report_errors
from relevant_sampling.core.config import get_config
from relevant_sampling.core.csvio import write_basis_csv
from relevant_sampling.core.prolate import ProlateBasis1D, build_basis_1d, tensor_basis


def half_point_verdict(basis: ProlateBasis1D) -> Optional[bool]:
    """mu_{R+1} <= 1/2 <= mu_{R-1} (1-based) for integer R; None when it does not apply."""
    R = basis.bandwidth_R
    if R != int(R) or R < 2 or basis.count <= int(R):
        return None
    R = int(R)
    return bool(basis.mu[R] <= 0.5 <= basis.mu[R - 2])


def execute_basis(
    R: float,
    d: int = 1,
    N: Optional[int] = None,
    quad_order: Optional[int] = None,
    out: Optional[str] = None,
    verbose: bool = False
) -> None:
    """Execute the basis command logic.

    Args:
        R: side length of the time cube
        d: dimension
        N: truncation level (defaults to R^d)
        quad_order: quadrature order (defaults to the minimum for R)
        out: CSV path for the eigenvalues
        verbose: Enable verbose output
    """
    with report_errors(verbose):
        config = get_config()
        if verbose:
            click.echo(f"🔧 Eigensolver: {config.numerics.eigensolver}, floor {config.numerics.eigen_floor:g}")

        basis = build_basis_1d(
            R, quad_order, floor=config.numerics.eigen_floor, method=config.numerics.eigensolver
        )
        if N is None:
            N = min(max(1, round(R**d)), basis.count**d)
        tb = tensor_basis(basis, d, N, floor=config.numerics.eigen_floor)

        click.echo(f"📐 Prolate basis for R={R:g} (quadrature order {basis.quad.order}, {basis.count} retained)")
        click.echo(f"{'k':>4}  {'mu_k':>22}")
        for k, mu in enumerate(basis.mu):
            click.echo(f"{k:>4}  {mu:>22.15e}")
        click.echo(f"sum(mu) = {basis.trace:.12g} (R = {R:g})")

        verdict = half_point_verdict(basis)
        if verdict is not None:
            status = "✅ holds" if verdict else "❌ fails"
            click.echo(f"Half-point property mu_(R+1) <= 1/2 <= mu_(R-1): {status}")

        if d > 1:
            click.echo(f"🧮 Tensor basis d={d}: {tb.count} products retained, N={tb.N}, alpha={tb.alpha:.12g}")
            for j in range(tb.N):
                index = ",".join(str(int(i)) for i in tb.multi_indices[j])
                click.echo(f"{j:>4}  {tb.lam[j]:>22.15e}  ({index})")

        if out:
            write_basis_csv(basis if d == 1 else tb, out)
            click.echo(f"💾 Wrote {out}")
