"""Monte Carlo campaign commands (mc-v1, mc-sampling, mc-cover)."""

import dataclasses
from typing import Optional, Tuple

import click

from relevant_sampling.commands import report_errors
from relevant_sampling.core.config import AppConfig, ExperimentConfig, get_config, load_experiment_config
from relevant_sampling.core.exceptions import StatisticalFailureError, TheoremViolationError
from relevant_sampling.core.experiment import CAMPAIGNS, CampaignSummary, emit_csv, resolve_config, run_with_rerun


def prepare_experiment(
    config_path: str,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> Tuple[ExperimentConfig, AppConfig]:
    """Load an experiment file, apply CLI overrides and fill in every default."""
    app = get_config()
    cfg = load_experiment_config(config_path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=seed)
    if workers is not None:
        cfg = dataclasses.replace(cfg, workers=workers)
    cfg = resolve_config(
        cfg,
        default_workers=app.runtime.workers,
        floor=app.numerics.eigen_floor,
        method=app.numerics.eigensolver,
    )
    return cfg, app


def _echo_summary(summary: CampaignSummary) -> None:
    click.echo(f"📋 Campaign {summary.campaign}: {summary.failures}/{summary.trials} failures")
    click.echo(f"  frequency = {summary.frequency:.6g}")
    click.echo(f"  bound     = {summary.bound:.6g} (+ margin {summary.margin:.3g})")
    if summary.theorem_probability is not None:
        click.echo(f"  theorem probability = {summary.theorem_probability:.6g}")
    if summary.vacuous:
        click.echo("  ⚠️  bound is vacuous or hypotheses fail; diagnostic run")
    if summary.rerun:
        click.echo("  🔁 result from the reseeded rerun")
    click.echo(f"  theorem violations = {summary.theorem_violations}")


def execute_campaign(
    kind: str,
    config_path: str,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    a: Optional[float] = None,
    verbose: bool = False
) -> None:
    """Execute one campaign.

    Args:
        kind: "v1", "sampling" or "cover"
        config_path: flat YAML experiment file
        out: CSV path for per-trial results
        seed: override for base_seed
        workers: override for the worker count
        a: covering threshold factor (cover only)
        verbose: Enable verbose output
    """
    with report_errors(verbose):
        cfg, app = prepare_experiment(config_path, seed=seed, workers=workers)
        if verbose:
            click.echo(
                f"🎲 {cfg.trials} trials, R={cfg.R:g}, d={cfg.d}, N={cfg.N}, M={cfg.M}, r={cfg.r}, "
                f"base_seed={cfg.base_seed}, workers={cfg.workers}"
            )

        kwargs = dict(floor=app.numerics.eigen_floor, method=app.numerics.eigensolver, rank_tol=app.numerics.rank_tol)
        if kind == "cover":
            kwargs["a"] = a
        result = run_with_rerun(CAMPAIGNS[kind], cfg, reruns=app.runtime.flake_reruns, **kwargs)

        if out:
            emit_csv(result, out)
            if verbose:
                click.echo(f"💾 Wrote {out}")
        _echo_summary(result.summary)

        summary = result.summary
        if summary.theorem_violations:
            raise TheoremViolationError(
                f"{summary.theorem_violations} trial(s) broke a deterministic inequality"
            )
        if not summary.passed:
            raise StatisticalFailureError(
                f"frequency {summary.frequency:.4g} exceeds bound {summary.bound:.4g} + {summary.margin:.3g}"
            )
        click.echo("✅ Campaign passed")
