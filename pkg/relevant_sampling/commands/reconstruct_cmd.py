"""Reconstruct command implementation."""

from typing import Optional

import click
import numpy as np

from relevant_sampling.commands import report_errors
from relevant_sampling.commands.campaign_cmd import prepare_experiment
from relevant_sampling.core.blfunc import synth_random
from relevant_sampling.core.csvio import read_samples_csv, read_values_csv, write_values_csv
from relevant_sampling.core.exceptions import InvalidArgumentError, TheoremViolationError
from relevant_sampling.core.experiment import build_tensor_basis, derive_seed, synthesis_target
from relevant_sampling.core.prolate import phi_matrix
from relevant_sampling.core.reconstruct import approxrec_check, least_squares
from relevant_sampling.core.sampling import draw_uniform


def execute_reconstruct(
    config_path: str,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    samples_path: Optional[str] = None,
    values_path: Optional[str] = None,
    verbose: bool = False
) -> None:
    """Recover the P_N coefficients from samples.

    With ``samples_path`` and ``values_path`` the given data are fitted and
    only the residual is reported. Otherwise f and the samples are drawn from
    the experiment seed and the residual is checked against its bound.
    """
    with report_errors(verbose):
        if (samples_path is None) != (values_path is None):
            raise InvalidArgumentError("--samples and --values must be given together")

        cfg, app = prepare_experiment(config_path, seed=seed)
        tb = build_tensor_basis(cfg.R, cfg.d, cfg.N, cfg.quad_order, app.numerics.eigen_floor, app.numerics.eigensolver)

        if samples_path is not None:
            samples = read_samples_csv(samples_path)
            _, sampled = read_values_csv(values_path)
            if verbose:
                click.echo(f"📂 {samples.r} samples from {samples_path}")
            coeffs = least_squares(tb, samples, sampled, rank_tol=app.numerics.rank_tol)
            residual = float(np.sum((sampled - phi_matrix(tb, samples.points, tb.N) @ coeffs) ** 2))
            click.echo(f"residual={residual:.12g} bound=n/a")
        else:
            f = synth_random(tb, cfg.M, synthesis_target(cfg, tb), cfg.base_seed)
            samples = draw_uniform(cfg.R, cfg.d, cfg.r, derive_seed(cfg.base_seed, 1))
            if verbose:
                click.echo(f"🎲 f with delta_f={f.delta:.6g}, {samples.r} uniform samples")
            report = approxrec_check(f, samples, rank_tol=app.numerics.rank_tol)
            coeffs = report.coeffs
            verdict = "PASS" if report.ok else "FAIL"
            click.echo(f"residual={report.residual:.12g} bound={report.bound:.12g} N0={report.N0} {verdict}")

        if out:
            write_values_csv(coeffs, out, name="c_j")
            if verbose:
                click.echo(f"💾 Wrote {out}")

        if samples_path is None and not report.ok:
            raise TheoremViolationError(f"residual {report.residual:.6g} exceeds bound {report.bound:.6g}")
