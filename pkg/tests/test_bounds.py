"""Tests for the closed-form bounds."""

import math

import numpy as np
import pytest

from relevant_sampling.core.bounds import (
    COVERING_EXPONENT,
    BoundParams,
    bernstein_tail_v1,
    bound_table,
    constant_A_general,
    constant_A_main,
    covering_tail,
    delta_feasible,
    feasible_radius,
    hypothesis_check,
    kappa,
    positivity_min_samples,
    prop1_tail,
    required_samples,
    sample_count_terms,
    theorem_probability,
    tropp_tail,
)
from relevant_sampling.core.exceptions import InvalidArgumentError


def _random_tuples(count=20, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(count):
        R = float(rng.uniform(2.0, 10.0))
        d = int(rng.integers(1, 4))
        nu = float(rng.uniform(0.01, 0.49))
        r = int(rng.integers(1, 100_000))
        yield R, d, nu, r


class TestConstants:
    def test_kappa(self):
        assert kappa(1) == pytest.approx(23.140692632779, rel=1e-12)
        assert kappa(2) == pytest.approx(535.491655524764, rel=1e-12)

    def test_kappa_invalid(self):
        with pytest.raises(InvalidArgumentError):
            kappa(0)

    def test_covering_exponent(self):
        assert COVERING_EXPONENT == pytest.approx(1.295836866, rel=1e-9)


class TestTails:
    """Test the matrix Bernstein tails."""

    def test_prop1_is_tropp_with_doubled_variance(self):
        """Test prop1_tail == tropp_tail(N, 2r/R^d, 1, 2r nu/R^d)."""
        for R, d, nu, r in _random_tuples():
            volume = R**d
            expected = tropp_tail(volume, 2 * r / volume, 1.0, 2 * r * nu / volume)

            assert prop1_tail(volume, r, R, d, nu) == pytest.approx(expected, rel=1e-12)

    def test_v1_is_plain_substitution(self):
        for R, d, nu, r in _random_tuples(seed=1):
            volume = R**d
            expected = tropp_tail(volume, r / volume, 1.0, r * nu / volume)

            assert bernstein_tail_v1(volume, r, R, d, nu) == pytest.approx(expected, rel=1e-12)

    def test_v1_never_tighter(self):
        for R, d, nu, r in _random_tuples(seed=2):
            assert bernstein_tail_v1(4, r, R, d, nu) >= prop1_tail(4, r, R, d, nu)

    def test_prop1_value(self):
        """Test the tail at R=4, r=394, nu=0.2, N=4."""
        assert prop1_tail(4, 394, 4.0, 1, 0.2) == pytest.approx(0.0995, rel=1e-3)

    def test_tropp_at_zero(self):
        assert tropp_tail(5, 1.0, 1.0, 0.0) == 5.0

    def test_tropp_invalid(self):
        with pytest.raises(InvalidArgumentError):
            tropp_tail(5, -1.0, 1.0, 1.0)
        with pytest.raises(InvalidArgumentError):
            tropp_tail(5, 1.0, 0.0, 1.0)

    def test_tails_decrease_in_r(self):
        values = [prop1_tail(4, r, 4.0, 1, 0.2) for r in (100, 200, 400, 800)]

        assert values == sorted(values, reverse=True)


class TestSampleCount:
    """Test the required sample count."""

    def test_known_value(self):
        """Test r(R=2, d=1, nu=1/4, eps=1/10) = 128."""
        assert required_samples(2, 1, 0.25, 0.1) == 128

    def test_acceptance_value(self):
        assert required_samples(4, 1, 0.2, 0.2) == 394

    def test_main_term_dominates(self):
        for R, d, nu, _ in _random_tuples(seed=3):
            terms = sample_count_terms(R, d, nu, 0.1)

            assert terms.dominant == "main"
            assert terms.r == required_samples(R, d, nu, 0.1)

    def test_small_R_rejected(self):
        with pytest.raises(InvalidArgumentError):
            required_samples(1.5, 1, 0.25, 0.1)

    @pytest.mark.parametrize("nu,eps", [(0.0, 0.1), (0.5, 0.1), (0.2, 0.0), (0.2, 1.0)])
    def test_invalid_parameters(self, nu, eps):
        with pytest.raises(InvalidArgumentError):
            required_samples(4, 1, nu, eps)


class TestFrameConstants:
    """Test the lower frame constants."""

    def test_general_reduces_to_main(self):
        """Test A_general(alpha=1/2, N0=3r/R^d) == A_main."""
        for R, d, nu, r in _random_tuples(seed=4):
            volume = R**d
            general = constant_A_general(r, R, d, 0.5, 1e-4, nu, 3 * r / volume)

            assert general == pytest.approx(constant_A_main(r, R, d, 1e-4, nu), rel=1e-9, abs=1e-9)

    def test_acceptance_constant(self):
        A = constant_A_main(394, 4.0, 1, 1e-3, 0.2)

        assert A == pytest.approx(394 / 4 * (0.3 - 1e-3 - 12e-3 * kappa(1)), rel=1e-12)
        assert 2.0 < A < 2.2

    def test_general_rejects_large_delta(self):
        with pytest.raises(InvalidArgumentError):
            constant_A_general(100, 4.0, 1, 0.5, 0.5, 0.1, 10)

    def test_positivity_threshold(self):
        """Test that A_general vanishes at the minimal sample count."""
        r_min = positivity_min_samples(4.0, 1, 0.9, 0.01, 0.1, 5)

        assert constant_A_general(r_min, 4.0, 1, 0.9, 0.01, 0.1, 5) == pytest.approx(0.0, abs=1e-9)
        assert constant_A_general(2 * r_min, 4.0, 1, 0.9, 0.01, 0.1, 5) > 0

    def test_positivity_impossible(self):
        assert positivity_min_samples(4.0, 1, 0.5, 0.2, 0.4, 5) == math.inf


class TestCovering:
    """Test the covering tail and the overall probability."""

    def test_default_threshold_exponent(self):
        R, d, r = 4.0, 1, 50
        expected = 6.0 * math.exp(-r * COVERING_EXPONENT / R)

        assert covering_tail(R, d, r, 3.0 / R) == pytest.approx(expected, rel=1e-12)

    def test_threshold_must_exceed_density(self):
        with pytest.raises(InvalidArgumentError, match="must exceed"):
            covering_tail(4.0, 1, 50, 0.25)

    def test_theorem_probability(self):
        """Test 1 - prop1_tail(R^d) - covering tail at the acceptance setting."""
        probability = theorem_probability(4.0, 1, 394, 0.2)

        assert probability == pytest.approx(1.0 - prop1_tail(4.0, 394, 4.0, 1, 0.2), abs=1e-12)
        assert probability >= 1.0 - 0.2


class TestHypotheses:
    """Test the delta and nu hypotheses."""

    def test_thresholds_d1(self):
        report = hypothesis_check(1e-3, 0.2, 1)

        assert report.delta_threshold == pytest.approx(1.794e-3, rel=1e-3)
        assert report.nu_threshold == pytest.approx(0.5 - 1e-3 * (1 + 12 * kappa(1)), rel=1e-12)
        assert report.ok

    def test_delta_too_large(self):
        report = hypothesis_check(0.01, 0.1, 1)

        assert not report.delta_ok
        assert not report.ok

    def test_nu_too_large(self):
        report = hypothesis_check(1e-3, 0.3, 1)

        assert report.delta_ok
        assert not report.nu_ok


class TestFeasibility:
    """Test the minimal achievable delta."""

    def test_delta_feasible_R2(self):
        assert delta_feasible(2.0) == pytest.approx(0.0235, rel=2e-3)

    def test_decreasing(self):
        values = [delta_feasible(R) for R in (1, 2, 4, 8)]

        assert values == sorted(values, reverse=True)

    def test_feasible_radius_inverts(self):
        R = feasible_radius(1e-3)

        assert R > 2.0
        assert delta_feasible(R) == pytest.approx(1e-3, rel=1e-8)

    def test_feasible_radius_trivial(self):
        assert feasible_radius(0.5) == 1.0


class TestBoundTable:
    """Test the full table."""

    def _rows(self, **kwargs):
        params = dict(R=4.0, d=1, nu=0.2, delta=1e-3, epsilon=0.2)
        params.update(kwargs)
        return {row.name: row for row in bound_table(BoundParams(**params))}

    def test_default_rows(self):
        rows = self._rows()

        assert rows["required_samples"].value == 394
        assert rows["r"].value == 394
        assert rows["r"].status == "auto"
        assert rows["prop1_tail"].status == "ok"
        assert rows["theorem_probability"].status == "ok"
        assert rows["constant_A_main"].status == "ok"
        assert rows["delta_threshold"].status == "ok"
        assert rows["delta_feasible"].status == "ok"
        assert "tropp_tail" not in rows

    def test_explicit_tropp_row(self):
        rows = self._rows(t=1.0, sigma2=2.0)

        assert rows["tropp_tail"].value == pytest.approx(tropp_tail(4, 2.0, 1.0, 1.0))

    def test_infeasible_delta_flagged(self):
        rows = self._rows(R=2.0)

        assert rows["delta_feasible"].status == "infeasible"

    def test_vacuous_tail(self):
        rows = self._rows(r=10)

        assert rows["prop1_tail"].status == "vacuous"
        assert rows["r"].status == "given"

    def test_small_R_with_r(self):
        rows = self._rows(R=1.5, r=100)

        assert math.isnan(rows["required_samples"].value)

    def test_small_R_without_r(self):
        with pytest.raises(InvalidArgumentError):
            self._rows(R=1.5)
