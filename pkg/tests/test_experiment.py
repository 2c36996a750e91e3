"""Tests for seeded Monte Carlo campaigns."""

import dataclasses
import math

import pytest

from relevant_sampling.core import bounds
from relevant_sampling.core.config import ExperimentConfig
from relevant_sampling.core.exceptions import ConfigError
from relevant_sampling.core.experiment import (
    RERUN_STREAM,
    CampaignResult,
    CampaignSummary,
    binomial_margin,
    build_tensor_basis,
    derive_seed,
    emit_csv,
    load_csv,
    resolve_config,
    run_covering_campaign,
    run_sampling_inequality_campaign,
    run_trial,
    run_v1_campaign,
    run_with_rerun,
    splitmix64,
    synthesis_target,
)

ACCEPTANCE = ExperimentConfig(
    R=4.0, d=1, N=4, nu=0.2, delta_target=1e-3, epsilon=0.2, trials=20, base_seed=12345,
)


class TestSeeds:
    """Test per-trial seed derivation."""

    def test_splitmix64_reference(self):
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_derive_seed(self):
        assert derive_seed(12345, 7) == 12345 ^ splitmix64(7)
        assert 0 <= derive_seed(2**64 - 1, 3) < 2**64

    def test_seeds_distinct(self):
        seeds = {derive_seed(1, i) for i in range(1000)}

        assert len(seeds) == 1000


class TestResolveConfig:
    def test_defaults(self):
        cfg = resolve_config(ACCEPTANCE)

        assert cfg.r == 394
        assert cfg.quad_order == 46
        assert cfg.M == 8
        assert cfg.workers == 1

    def test_explicit_values_kept(self):
        cfg = resolve_config(dataclasses.replace(ACCEPTANCE, r=100, M=6, workers=3))

        assert cfg.r == 100
        assert cfg.M == 6
        assert cfg.workers == 3

    def test_small_regime_target(self):
        cfg = resolve_config(dataclasses.replace(ACCEPTANCE, regime="small"))
        tb = build_tensor_basis(cfg.R, cfg.d, cfg.N, cfg.quad_order)

        assert synthesis_target(cfg, tb) == max(1.0 - tb.lam[0], 1e-5)
        assert synthesis_target(resolve_config(ACCEPTANCE), tb) == 1e-3


class TestRunTrial:
    """Test a single trial."""

    def test_deterministic(self):
        cfg = resolve_config(ACCEPTANCE)
        tb = build_tensor_basis(cfg.R, cfg.d, cfg.N, cfg.quad_order)

        assert run_trial(cfg, tb, 3) == run_trial(cfg, tb, 3)

    def test_trial_fields(self):
        cfg = resolve_config(ACCEPTANCE)
        tb = build_tensor_basis(cfg.R, cfg.d, cfg.N, cfg.quad_order)

        result = run_trial(cfg, tb, 0)

        assert result.trial == 0
        assert result.seed == derive_seed(12345, 0)
        assert result.delta_f <= 1e-3
        assert result.sampling_sum <= cfg.r * result.f_norm2
        assert result.N0 >= cfg.r // 5
        assert result.theorem_ok
        assert result.A_lhs_ok


class TestCampaigns:
    """Test the three campaigns at small trial counts."""

    def test_v1_campaign(self):
        result = run_v1_campaign(ACCEPTANCE)
        summary = result.summary

        assert summary.campaign == "v1"
        assert summary.trials == 20
        assert len(result.trials) == 20
        assert summary.bound == pytest.approx(bounds.prop1_tail(4, 394, 4.0, 1, 0.2))
        assert summary.theorem_violations == 0
        assert summary.passed

    def test_sampling_campaign(self):
        result = run_sampling_inequality_campaign(ACCEPTANCE)
        summary = result.summary

        assert summary.failures == 0
        assert not summary.vacuous
        assert summary.bound == pytest.approx(1.0 - summary.theorem_probability)
        assert summary.passed

    def test_sampling_campaign_diagnostic(self):
        """Test that a failing delta hypothesis reports the campaign as vacuous."""
        cfg = ExperimentConfig(
            R=2.0, d=1, N=2, nu=0.2, delta_target=0.05, epsilon=0.2, trials=10, base_seed=1, r=128,
        )
        summary = run_sampling_inequality_campaign(cfg).summary

        assert summary.vacuous
        assert summary.passed
        assert summary.theorem_violations == 0

    def test_covering_campaign(self):
        result = run_covering_campaign(ACCEPTANCE)

        assert result.summary.failures == 0
        assert result.summary.bound == pytest.approx(bounds.covering_tail(4.0, 1, 394, 0.75))
        assert result.summary.passed

    def test_same_seed_same_trials(self):
        a = run_v1_campaign(dataclasses.replace(ACCEPTANCE, trials=5))
        b = run_v1_campaign(dataclasses.replace(ACCEPTANCE, trials=5))

        assert a.trials == b.trials

    def test_frame_constant_below_frame_bound(self):
        """Test A <= r lambda_min(G) in every trial without a large deviation."""
        result = run_sampling_inequality_campaign(ACCEPTANCE)
        tb = build_tensor_basis(4.0, 1, 4, 46)
        A = bounds.constant_A_main(394, 4.0, 1, 1e-3, 0.2)

        assert tb.alpha >= 0.5
        for trial in result.trials:
            if trial.deviation_lambda_min > -0.2 / 4.0:
                assert A <= trial.frame_lower

    @pytest.mark.slow
    def test_sampling_campaign_full_scale(self):
        """Test 200 trials: lower-bound failures within 0.2 plus three standard errors."""
        result = run_sampling_inequality_campaign(dataclasses.replace(ACCEPTANCE, trials=200))
        summary = result.summary
        A = bounds.constant_A_main(394, 4.0, 1, 1e-3, 0.2)

        assert summary.frequency <= 0.2 + 3 * math.sqrt(0.2 * 0.8 / 200)
        assert summary.theorem_violations == 0
        assert summary.passed
        for trial in result.trials:
            if trial.deviation_lambda_min > -0.2 / 4.0:
                assert A <= trial.frame_lower

    @pytest.mark.slow
    def test_v1_campaign_full_scale(self):
        summary = run_v1_campaign(dataclasses.replace(ACCEPTANCE, trials=200)).summary

        assert summary.frequency <= summary.bound + binomial_margin(summary.bound, 200)
        assert summary.passed

    @pytest.mark.slow
    def test_covering_campaign_full_scale(self):
        """Test r=500 over 500 trials at a = 3 R^-d."""
        cfg = dataclasses.replace(ACCEPTANCE, r=500, trials=500)
        summary = run_covering_campaign(cfg).summary
        bound = bounds.covering_tail(4.0, 1, 500, 0.75)

        assert summary.bound == pytest.approx(bound)
        if bound < 1.0:
            assert summary.frequency <= bound
        else:
            assert summary.vacuous
        assert summary.passed

    @pytest.mark.slow
    def test_worker_count_does_not_change_results(self):
        cfg = dataclasses.replace(ACCEPTANCE, trials=6)

        serial = run_v1_campaign(dataclasses.replace(cfg, workers=1))
        parallel = run_v1_campaign(dataclasses.replace(cfg, workers=2))

        assert serial.trials == parallel.trials
        assert serial.summary.failures == parallel.summary.failures


def _result(passed, violations=0, seed=0):
    summary = CampaignSummary(
        campaign="v1", trials=1, failures=0, frequency=0.0, bound=0.1, margin=0.0,
        passed=passed, vacuous=False, theorem_violations=violations,
    )
    return CampaignResult(dataclasses.replace(ACCEPTANCE, base_seed=seed), [], summary)


class TestRerun:
    """Test the one-shot rerun on statistical misses."""

    def test_pass_not_rerun(self):
        calls = []

        def campaign(cfg):
            calls.append(cfg.base_seed)
            return _result(True, seed=cfg.base_seed)

        result = run_with_rerun(campaign, ACCEPTANCE)

        assert calls == [12345]
        assert not result.summary.rerun

    def test_miss_rerun_with_fresh_seed(self):
        calls = []

        def campaign(cfg):
            calls.append(cfg.base_seed)
            return _result(len(calls) > 1, seed=cfg.base_seed)

        result = run_with_rerun(campaign, ACCEPTANCE)

        assert calls == [12345, derive_seed(12345, RERUN_STREAM)]
        assert result.summary.passed
        assert result.summary.rerun

    def test_theorem_violation_not_rerun(self):
        calls = []

        def campaign(cfg):
            calls.append(cfg.base_seed)
            return _result(False, violations=1)

        run_with_rerun(campaign, ACCEPTANCE)

        assert len(calls) == 1

    def test_no_reruns(self):
        calls = []

        def campaign(cfg):
            calls.append(cfg.base_seed)
            return _result(False)

        assert not run_with_rerun(campaign, ACCEPTANCE, reruns=0).summary.passed
        assert len(calls) == 1


class TestBinomialMargin:
    def test_value(self):
        assert binomial_margin(0.1, 100) == pytest.approx(0.09)

    def test_clipped(self):
        assert binomial_margin(1.5, 100) == 0.0


class TestCampaignCsv:
    """Test the per-trial CSV."""

    def test_round_trip(self, tmp_path):
        result = run_sampling_inequality_campaign(dataclasses.replace(ACCEPTANCE, trials=4))
        path = tmp_path / "out" / "campaign.csv"

        emit_csv(result, path)
        loaded = load_csv(path)

        assert loaded.config == result.config
        assert loaded.trials == result.trials
        assert loaded.summary == result.summary

    def test_layout(self, tmp_path):
        result = run_v1_campaign(dataclasses.replace(ACCEPTANCE, trials=3))
        path = tmp_path / "campaign.csv"

        emit_csv(result, path)
        lines = path.read_text().splitlines()

        assert lines[0].startswith("R,d,N,M,r,nu,delta_target,epsilon,trials,base_seed,")
        assert lines[0].endswith(",qestim_ok,compprolo_ok")
        assert len(lines) == 5
        assert lines[-1].startswith("#summary,campaign=v1,trials=3,")

    def test_malformed_row(self, tmp_path):
        result = run_v1_campaign(dataclasses.replace(ACCEPTANCE, trials=2))
        path = tmp_path / "campaign.csv"
        emit_csv(result, path)
        lines = path.read_text().splitlines()
        lines[2] = lines[2].replace("True", "maybe", 1)
        path.write_text("\n".join(lines) + "\n")

        with pytest.raises(ConfigError) as exc_info:
            load_csv(path)

        assert exc_info.value.line == 3

    def test_bad_header(self, tmp_path):
        path = tmp_path / "campaign.csv"
        path.write_text("a,b\n1,2\n")

        with pytest.raises(ConfigError, match="header"):
            load_csv(path)
