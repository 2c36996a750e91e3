"""Plancherel-Polya check command implementation."""

from typing import Optional

import click

from relevant_sampling.commands import report_errors
from relevant_sampling.commands.campaign_cmd import prepare_experiment
from relevant_sampling.core.blfunc import synth_random
from relevant_sampling.core.csvio import read_samples_csv, write_table_csv
from relevant_sampling.core.exceptions import TheoremViolationError
from relevant_sampling.core.experiment import build_tensor_basis, derive_seed, synthesis_target
from relevant_sampling.core.sampling import clustered_samples, draw_uniform, pp_check


def execute_pp_check(
    config_path: str,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    samples_path: Optional[str] = None,
    cluster: bool = False,
    verbose: bool = False
) -> None:
    """Check sum_j f(x_j)^2 <= N0 e^{d pi} ||f||^2 for a seeded f."""
    with report_errors(verbose):
        cfg, app = prepare_experiment(config_path, seed=seed)
        tb = build_tensor_basis(cfg.R, cfg.d, cfg.N, cfg.quad_order, app.numerics.eigen_floor, app.numerics.eigensolver)
        f = synth_random(tb, cfg.M, synthesis_target(cfg, tb), cfg.base_seed)

        sample_seed = derive_seed(cfg.base_seed, 1)
        if samples_path is not None:
            samples = read_samples_csv(samples_path)
            design = f"file {samples_path}"
        elif cluster:
            samples = clustered_samples(f, cfg.r, sample_seed)
            design = "clustered"
        else:
            samples = draw_uniform(cfg.R, cfg.d, cfg.r, sample_seed)
            design = "uniform"
        if verbose:
            click.echo(f"🎲 {samples.r} {design} samples, delta_f={f.delta:.6g}")

        report = pp_check(f, samples)
        verdict = "PASS" if report.ok else "FAIL"
        click.echo(f"lhs={report.lhs:.12g} rhs={report.rhs:.12g} N0={report.N0} {verdict}")

        if out:
            write_table_csv(
                ["design", "r", "N0", "lhs", "rhs", "ok"],
                [(design, samples.r, report.N0, report.lhs, report.rhs, report.ok)],
                out,
            )
            if verbose:
                click.echo(f"💾 Wrote {out}")

        if not report.ok:
            raise TheoremViolationError(f"sampled energy {report.lhs:.6g} exceeds {report.rhs:.6g}")
