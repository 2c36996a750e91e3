"""Seeded Monte Carlo campaigns over the random sampling events.

Every campaign runs the same trial: synthesize f, draw samples, build the
frame matrix, then record the deviation, covering index, sampled energy,
least-squares residual and the deterministic inequalities. Campaigns differ
only in which event they count and which tail they compare against.

Per-trial seeds are ``base_seed XOR splitmix64(i)``; samples use the stream
``derive_seed(trial_seed, 1)`` so f and the points never share a generator.
"""

import csv
import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache, partial
from pathlib import Path
from typing import Callable, List, Optional, get_args

import numpy as np

from relevant_sampling.core import bounds
from relevant_sampling.core.blfunc import default_m, qestim_check, synth_random, values
from relevant_sampling.core.config import EXPERIMENT_FIELDS, ExperimentConfig
from relevant_sampling.core.exceptions import ConfigError, InvalidArgumentError
from relevant_sampling.core.prolate import EIGEN_FLOOR, TensorBasis, build_basis_1d, required_quad_order, tensor_basis
from relevant_sampling.core.reconstruct import RANK_TOL, approxrec_check
from relevant_sampling.core.sampling import (
    covering_index,
    deviation_lambda_min,
    draw_uniform,
    frame_lower_bound,
    frame_matrix,
    pp_check,
)

MASK64 = (1 << 64) - 1
RERUN_STREAM = 1 << 32
SIGMA_MARGIN = 3.0
THEOREM_SLACK = 1e-9
SUMMARY_PREFIX = "#summary"


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """base_seed XOR splitmix64(index), as a 64-bit value."""
    return (base_seed ^ splitmix64(index)) & MASK64


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    deviation_lambda_min: float
    N0: int
    sampling_sum: float
    f_norm2: float
    delta_f: float
    A_lhs_ok: bool
    upper_ok: bool
    residual: float
    residual_bound: float
    residual_ok: bool
    frame_lower: float
    pp_ok: bool
    qestim_ok: bool
    compprolo_ok: bool

    @property
    def theorem_ok(self) -> bool:
        return self.upper_ok and self.residual_ok and self.pp_ok and self.qestim_ok and self.compprolo_ok


@dataclass(frozen=True)
class CampaignSummary:
    campaign: str
    trials: int
    failures: int
    frequency: float
    bound: float
    margin: float
    passed: bool
    vacuous: bool
    theorem_violations: int
    rerun: bool = False
    theorem_probability: Optional[float] = None


@dataclass(frozen=True)
class CampaignResult:
    config: ExperimentConfig
    trials: List[TrialResult]
    summary: CampaignSummary


@lru_cache(maxsize=8)
def build_tensor_basis(R: float, d: int, N: int, quad_order: int, floor: float = EIGEN_FLOOR, method: str = "lapack") -> TensorBasis:
    """Basis shared by every trial of a campaign; cached per parameter set."""
    return tensor_basis(build_basis_1d(R, quad_order, floor=floor, method=method), d, N, floor=floor)


def resolve_config(cfg: ExperimentConfig, default_workers: int = 1, floor: float = EIGEN_FLOOR, method: str = "lapack") -> ExperimentConfig:
    """Fill r, quad_order, M and workers from their defaults."""
    r = cfg.r if cfg.r is not None else bounds.required_samples(cfg.R, cfg.d, cfg.nu, cfg.epsilon)
    quad_order = cfg.quad_order if cfg.quad_order is not None else required_quad_order(cfg.R)
    workers = cfg.workers if cfg.workers is not None else default_workers
    M = cfg.M
    if M is None:
        M = default_m(build_tensor_basis(cfg.R, cfg.d, cfg.N, quad_order, floor, method))
    return dataclasses.replace(cfg, r=r, quad_order=quad_order, M=M, workers=workers)


def synthesis_target(cfg: ExperimentConfig, tb: TensorBasis) -> float:
    """delta used to synthesize f: the target itself, or max(1 - lambda_1, delta/100) for the small regime."""
    if cfg.regime == "small":
        return max(1.0 - float(tb.lam[0]), cfg.delta_target / 100.0)
    return cfg.delta_target


def _compprolo_ok(cfg: ExperimentConfig, tb: TensorBasis, delta_f: float, deviation: float, n0: int,
                  sampling_sum: float, norm2: float) -> bool:
    # The trial satisfies the deviation hypothesis exactly with nu = -R^d * deviation.
    nu = max(0.0, -tb.volume * deviation)
    try:
        A = bounds.constant_A_general(cfg.r, cfg.R, cfg.d, tb.alpha, delta_f, nu, n0)
    except InvalidArgumentError:
        return True
    return sampling_sum >= A * norm2 - THEOREM_SLACK * max(sampling_sum, norm2 * cfg.r / tb.volume)


def run_trial(cfg: ExperimentConfig, tb: TensorBasis, index: int, rank_tol: float = RANK_TOL) -> TrialResult:
    """One seeded trial on a resolved config."""
    seed = derive_seed(cfg.base_seed, index)
    f = synth_random(tb, cfg.M, synthesis_target(cfg, tb), seed)
    samples = draw_uniform(cfg.R, cfg.d, cfg.r, derive_seed(seed, 1))

    fm = frame_matrix(tb, samples)
    deviation = deviation_lambda_min(fm)
    n0 = covering_index(samples)
    sampled = values(f, samples.points)
    sampling_sum = float(np.sum(sampled**2))
    norm2 = f.norm2
    delta_f = f.delta

    A = bounds.constant_A_main(cfg.r, cfg.R, cfg.d, cfg.delta_target, cfg.nu)
    rec = approxrec_check(f, samples, sampled=sampled, rank_tol=rank_tol)

    return TrialResult(
        trial=index,
        seed=seed,
        deviation_lambda_min=deviation,
        N0=n0,
        sampling_sum=sampling_sum,
        f_norm2=norm2,
        delta_f=delta_f,
        A_lhs_ok=bool(A * norm2 <= sampling_sum),
        upper_ok=bool(sampling_sum <= cfg.r * norm2 * (1.0 + THEOREM_SLACK)),
        residual=rec.residual,
        residual_bound=rec.bound,
        residual_ok=bool(rec.ok),
        frame_lower=frame_lower_bound(fm),
        pp_ok=bool(pp_check(f, samples, sampled=sampled).ok),
        qestim_ok=bool(qestim_check(f).ok),
        compprolo_ok=bool(_compprolo_ok(cfg, tb, delta_f, deviation, n0, sampling_sum, norm2)),
    )


def _run_trials(cfg: ExperimentConfig, floor: float, method: str, rank_tol: float) -> List[TrialResult]:
    tb = build_tensor_basis(cfg.R, cfg.d, cfg.N, cfg.quad_order, floor, method)
    work = partial(run_trial, cfg, tb, rank_tol=rank_tol)
    indices = range(cfg.trials)
    if cfg.workers <= 1:
        return [work(i) for i in indices]
    # executor.map yields in submission order
    with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
        chunk = max(1, cfg.trials // (4 * cfg.workers))
        return list(executor.map(work, indices, chunksize=chunk))


def binomial_margin(p: float, trials: int) -> float:
    """Three binomial standard errors at success probability p (clipped to [0, 1])."""
    p = min(max(p, 0.0), 1.0)
    return SIGMA_MARGIN * math.sqrt(p * (1.0 - p) / trials)


def _summarize(name: str, trials: List[TrialResult], failures: int, bound: float,
               vacuous: bool, probability: Optional[float] = None) -> CampaignSummary:
    frequency = failures / len(trials)
    margin = binomial_margin(bound, len(trials))
    vacuous = vacuous or bound >= 1.0
    return CampaignSummary(
        campaign=name,
        trials=len(trials),
        failures=failures,
        frequency=frequency,
        bound=bound,
        margin=margin,
        passed=vacuous or frequency <= bound + margin,
        vacuous=vacuous,
        theorem_violations=sum(not t.theorem_ok for t in trials),
        theorem_probability=probability,
    )


def run_v1_campaign(cfg: ExperimentConfig, floor: float = EIGEN_FLOOR, method: str = "lapack",
                    rank_tol: float = RANK_TOL) -> CampaignResult:
    """Frequency of deviation_lambda_min <= -nu/R^d against N exp(-nu^2 r/(R^d(1+nu/3)))."""
    cfg = resolve_config(cfg, floor=floor, method=method)
    trials = _run_trials(cfg, floor, method, rank_tol)
    threshold = -cfg.nu / cfg.R**cfg.d
    failures = sum(t.deviation_lambda_min <= threshold for t in trials)
    bound = bounds.prop1_tail(cfg.N, cfg.r, cfg.R, cfg.d, cfg.nu)
    return CampaignResult(cfg, trials, _summarize("v1", trials, failures, bound, vacuous=False))


def run_sampling_inequality_campaign(cfg: ExperimentConfig, floor: float = EIGEN_FLOOR, method: str = "lapack",
                                     rank_tol: float = RANK_TOL) -> CampaignResult:
    """Frequency of A ||f||^2 > sum_j f(x_j)^2 against epsilon and 1 - theorem_probability.

    When the delta or nu hypothesis fails the constant A carries no guarantee
    and the campaign runs in diagnostic mode (reported as vacuous).
    """
    cfg = resolve_config(cfg, floor=floor, method=method)
    trials = _run_trials(cfg, floor, method, rank_tol)
    failures = sum(not t.A_lhs_ok for t in trials)

    probability = bounds.theorem_probability(cfg.R, cfg.d, cfg.r, cfg.nu)
    bound = 1.0 - probability
    if cfg.R >= 2 and 0 < cfg.nu < 0.5 and cfg.r >= bounds.required_samples(cfg.R, cfg.d, cfg.nu, cfg.epsilon):
        bound = min(bound, cfg.epsilon)
    diagnostic = not bounds.hypothesis_check(cfg.delta_target, cfg.nu, cfg.d).ok
    summary = _summarize("sampling", trials, failures, bound, vacuous=diagnostic, probability=probability)
    return CampaignResult(cfg, trials, summary)


def run_covering_campaign(cfg: ExperimentConfig, a: Optional[float] = None, floor: float = EIGEN_FLOOR,
                          method: str = "lapack", rank_tol: float = RANK_TOL) -> CampaignResult:
    """Frequency of N0 > a r against (R+2)^d exp(-r(a log(a R^d) - (a - R^-d))); a defaults to 3R^-d."""
    cfg = resolve_config(cfg, floor=floor, method=method)
    a = 3.0 / cfg.R**cfg.d if a is None else a
    bound = bounds.covering_tail(cfg.R, cfg.d, cfg.r, a)
    trials = _run_trials(cfg, floor, method, rank_tol)
    failures = sum(t.N0 > a * cfg.r for t in trials)
    return CampaignResult(cfg, trials, _summarize("cover", trials, failures, bound, vacuous=False))


def run_with_rerun(campaign: Callable[..., CampaignResult], cfg: ExperimentConfig, reruns: int = 1,
                   **kwargs) -> CampaignResult:
    """Run a campaign; on a statistical miss rerun it with a base seed from the rerun stream.

    Theorem violations are never retried.
    """
    result = campaign(cfg, **kwargs)
    for attempt in range(reruns):
        if result.summary.passed or result.summary.theorem_violations:
            break
        seed = derive_seed(cfg.base_seed, RERUN_STREAM + attempt)
        result = campaign(dataclasses.replace(cfg, base_seed=seed), **kwargs)
        result = dataclasses.replace(result, summary=dataclasses.replace(result.summary, rerun=True))
    return result


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text: str, kind):
    if text == "":
        return None
    # Optional[X] -> X
    args = [arg for arg in get_args(kind) if arg is not type(None)]
    kind = args[0] if args else kind
    if kind is bool:
        if text not in ("True", "False"):
            raise ValueError(f"not a boolean: {text!r}")
        return text == "True"
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text


_CONFIG_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_TRIAL_FIELDS = [f.name for f in fields(TrialResult)]
_TRIAL_TYPES = {f.name: f.type for f in fields(TrialResult)}
_SUMMARY_TYPES = {f.name: f.type for f in fields(CampaignSummary)}


def emit_csv(result: CampaignResult, path) -> None:
    """One row per trial (config echo columns, then trial fields) and a final #summary row."""
    header = list(EXPERIMENT_FIELDS) + _TRIAL_FIELDS
    echo = [_fmt(getattr(result.config, name)) for name in EXPERIMENT_FIELDS]
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for trial in result.trials:
            writer.writerow(echo + [_fmt(getattr(trial, name)) for name in _TRIAL_FIELDS])
        writer.writerow(
            [SUMMARY_PREFIX] + [f"{k.name}={_fmt(getattr(result.summary, k.name))}" for k in fields(CampaignSummary)]
        )


def load_csv(path) -> CampaignResult:
    """Read a campaign CSV written by emit_csv.

    Raises:
        ConfigError: with the offending line on a malformed file
    """
    path = str(path)
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise ConfigError(f"Failed to read campaign file: {e}", path=path)

    header = list(EXPERIMENT_FIELDS) + _TRIAL_FIELDS
    if not rows or rows[0] != header:
        raise ConfigError("Unexpected campaign CSV header", path=path, line=1)

    config = None
    trials: List[TrialResult] = []
    summary = None
    n_config = len(EXPERIMENT_FIELDS)
    for line, row in enumerate(rows[1:], start=2):
        try:
            if row and row[0] == SUMMARY_PREFIX:
                items = dict(cell.split("=", 1) for cell in row[1:])
                summary = CampaignSummary(**{
                    name: _parse(items[name], _SUMMARY_TYPES[name]) for name in _SUMMARY_TYPES
                })
                continue
            if len(row) != len(header):
                raise ValueError(f"expected {len(header)} columns, got {len(row)}")
            if config is None:
                config = ExperimentConfig(**{
                    name: _parse(text, _CONFIG_TYPES[name]) for name, text in zip(EXPERIMENT_FIELDS, row)
                })
            trials.append(TrialResult(**{
                name: _parse(text, _TRIAL_TYPES[name]) for name, text in zip(_TRIAL_FIELDS, row[n_config:])
            }))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed campaign row: {e}", path=path, line=line)

    if config is None or summary is None:
        raise ConfigError("Campaign file has no trials or no summary row", path=path)
    return CampaignResult(config, trials, summary)


CAMPAIGNS = {
    "v1": run_v1_campaign,
    "sampling": run_sampling_inequality_campaign,
    "cover": run_covering_campaign,
}
