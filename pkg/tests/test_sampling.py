"""Tests for sample sets, the frame matrix and the covering index."""

import numpy as np
import pytest
import scipy.linalg

from relevant_sampling.core import sampling
from relevant_sampling.core.blfunc import BandlimitedFunction, synth_random, values
from relevant_sampling.core.exceptions import InvalidArgumentError
from relevant_sampling.core.prolate import build_basis_1d, kernel_diag_m, phi_matrix, tensor_basis
from relevant_sampling.core.sampling import (
    SampleSet,
    clustered_samples,
    covering_index,
    deviation_lambda_min,
    draw_uniform,
    frame_lower_bound,
    frame_matrix,
    pp_check,
    rank_one_T,
)


@pytest.fixture(scope="module")
def tb2():
    return tensor_basis(build_basis_1d(2), 1, 2)


@pytest.fixture(scope="module")
def tb4():
    return tensor_basis(build_basis_1d(4), 1, 4)


class TestDrawUniform:
    """Test seeded uniform sampling."""

    def test_deterministic(self):
        a = draw_uniform(4.0, 2, 50, seed=3)
        b = draw_uniform(4.0, 2, 50, seed=3)

        np.testing.assert_array_equal(a.points, b.points)
        assert a.seed == 3

    def test_shape_and_range(self):
        samples = draw_uniform(4.0, 2, 1000, seed=11)

        assert samples.points.shape == (1000, 2)
        assert samples.r == 1000
        assert np.all(samples.points >= -2.0)
        assert np.all(samples.points < 2.0)

    def test_points_read_only(self):
        samples = draw_uniform(2.0, 1, 5, seed=0)

        with pytest.raises(ValueError):
            samples.points[0, 0] = 1.0

    def test_mean_near_center(self):
        """Test that each coordinate mean is within three standard errors of zero."""
        samples = draw_uniform(4.0, 1, 100_000, seed=77)

        assert np.all(np.abs(samples.points.mean(axis=0)) <= 3.0 * 4.0 / np.sqrt(12 * 100_000))

    def test_invalid_count(self):
        with pytest.raises(InvalidArgumentError):
            draw_uniform(2.0, 1, 0, seed=0)


class TestFrameMatrix:
    """Test G = (1/r) sum T_j."""

    def test_rank_one_identity(self, tb4):
        """Test T^2 = m(x) T on 1000 random points."""
        rng = np.random.Generator(np.random.PCG64(17))

        for x in rng.uniform(-2.0, 2.0, 1000):
            T = rank_one_T(tb4, x)
            m = kernel_diag_m(tb4, x)

            assert np.linalg.norm(T @ T - m * T) <= 1e-10

    def test_rank_one(self, tb4):
        """Test that T is symmetric rank one with trace m(x)."""
        T = rank_one_T(tb4, 0.37)

        np.testing.assert_array_equal(T, T.T)
        assert np.linalg.matrix_rank(T) == 1
        assert np.trace(T) == pytest.approx(kernel_diag_m(tb4, 0.37), rel=1e-12)

    def test_average_of_rank_one(self, tb4):
        samples = draw_uniform(4.0, 1, 20, seed=5)
        fm = frame_matrix(tb4, samples)

        expected = sum(rank_one_T(tb4, x) for x in samples.points) / 20
        np.testing.assert_allclose(fm.G, expected, atol=1e-13)
        assert fm.r == 20

    def test_chunking(self, tb4, monkeypatch):
        """Test that the chunked sum matches one product."""
        samples = draw_uniform(4.0, 1, 100, seed=6)
        phi = phi_matrix(tb4, samples.points)
        monkeypatch.setattr(sampling, "FRAME_CHUNK", 7)

        fm = frame_matrix(tb4, samples)

        np.testing.assert_allclose(fm.G, phi.T @ phi / 100, atol=1e-13)

    def test_symmetric_psd(self, tb4):
        fm = frame_matrix(tb4, draw_uniform(4.0, 1, 10, seed=1))

        np.testing.assert_array_equal(fm.G, fm.G.T)
        assert frame_lower_bound(fm) >= -1e-12

    @pytest.mark.slow
    def test_expectation(self, tb2):
        """Test that every entry of mean(T_j) is within 4 standard errors of R^-d diag(lambda)."""
        r = 100_000
        samples = draw_uniform(2.0, 1, r, seed=2024)
        phi = phi_matrix(tb2, samples.points)
        products = phi[:, :, None] * phi[:, None, :]

        mean = products.mean(axis=0)
        stderr = products.std(axis=0, ddof=1) / np.sqrt(r)
        target = np.diag(tb2.lam[:2]) / 2.0

        assert np.all(np.abs(mean - target) <= 4.0 * stderr)
        np.testing.assert_allclose(frame_matrix(tb2, samples).G, mean, atol=1e-12)

    def test_too_few_samples_singular(self, tb4):
        """Test that fewer samples than N leave G singular."""
        fm = frame_matrix(tb4, draw_uniform(4.0, 1, 2, seed=9))

        assert frame_lower_bound(fm) == pytest.approx(0.0, abs=1e-10)



class TestDeviation:
    """Test lambda_min(G - R^-d diag(lambda))."""

    def test_single_term_is_scalar(self):
        """Test that N=1 reduces to mean(phi_1(x_j)^2) - lambda_1 / R."""
        tb = tensor_basis(build_basis_1d(4), 1, 1)
        samples = draw_uniform(4.0, 1, 50, seed=12)

        fm = frame_matrix(tb, samples)
        phi_1 = phi_matrix(tb, samples.points)[:, 0]

        assert deviation_lambda_min(fm) == pytest.approx(np.mean(phi_1**2) - tb.lam[0] / 4.0, abs=1e-14)

    def test_lower_limit(self, tb4):
        """Test that the deviation never drops below -lambda_1 / R^d."""
        for seed in range(20):
            fm = frame_matrix(tb4, draw_uniform(4.0, 1, 30, seed=seed))

            assert deviation_lambda_min(fm) >= -tb4.lam[0] / 4.0 - 1e-12

    def test_rayleigh_quotients(self, tb4):
        """Test that no unit vector gives a quadratic form below the smallest eigenvalue."""
        fm = frame_matrix(tb4, draw_uniform(4.0, 1, 100, seed=21))
        deviation = fm.G - tb4.delta_matrix / 4.0
        lowest = deviation_lambda_min(fm)

        rng = np.random.Generator(np.random.PCG64(3))
        vectors = rng.standard_normal((10_000, 4))
        vectors /= np.linalg.norm(vectors, axis=1)[:, None]
        quotients = np.einsum("ij,jk,ik->i", vectors, deviation, vectors)

        assert lowest <= quotients.min() + 1e-10
        _, eigvecs = scipy.linalg.eigh(deviation)
        assert eigvecs[:, 0] @ deviation @ eigvecs[:, 0] == pytest.approx(lowest, abs=1e-12)


class TestCoveringIndex:
    """Test N0 over half-open unit cells."""

    def test_half_open_cells(self):
        samples = SampleSet(R=2.0, d=1, points=[[0.49], [-0.5], [0.5]])

        assert covering_index(samples) == 2

    def test_two_dimensions(self):
        points = [[0.1, 0.1], [-0.2, 0.3], [0.9, 0.1], [0.2, -0.4]]
        samples = SampleSet(R=4.0, d=2, points=points)

        assert covering_index(samples) == 3

    def test_all_at_origin(self):
        samples = SampleSet(R=4.0, d=2, points=np.zeros((25, 2)))

        assert covering_index(samples) == 25

    def test_distinct_lattice_sites(self):
        points = [[i, j] for i in range(-2, 2) for j in range(-2, 2)]

        assert covering_index(SampleSet(R=4.0, d=2, points=points)) == 1

    def test_matches_window_scan(self):
        """Test against counting every unit window k + [-1/2, 1/2) directly."""
        samples = draw_uniform(4.0, 1, 200, seed=44)
        x = samples.points[:, 0]

        expected = max(int(np.sum((x >= k - 0.5) & (x < k + 0.5))) for k in range(-3, 4))

        assert covering_index(samples) == expected

    def test_single_point(self):
        assert covering_index(draw_uniform(4.0, 1, 1, seed=0)) == 1

    def test_bounds(self):
        """Test ceil(r / #cells) <= N0 <= r."""
        samples = draw_uniform(4.0, 1, 100, seed=31)
        n0 = covering_index(samples)

        assert 20 <= n0 <= 100


class TestPlancherelPolya:
    """Test the sampled-energy upper bound."""

    def test_random_samples(self, tb4):
        for seed in range(10):
            f = synth_random(tb4, 8, 0.05, seed=seed)
            samples = draw_uniform(4.0, 1, 300, seed=seed + 100)
            report = pp_check(f, samples)

            assert report.ok
            assert report.N0 == covering_index(samples)

    def test_precomputed_values(self, tb4):
        f = synth_random(tb4, 8, 0.05, seed=1)
        samples = draw_uniform(4.0, 1, 50, seed=2)

        direct = pp_check(f, samples)
        given = pp_check(f, samples, sampled=values(f, samples.points))

        assert direct.lhs == given.lhs
        assert direct.rhs == given.rhs

    def test_clustered_samples(self, tb4):
        """Test that the bound survives all samples piled near the peak of |f|."""
        f = synth_random(tb4, 8, 0.05, seed=4)
        samples = clustered_samples(f, 200, seed=8)
        report = pp_check(f, samples)

        assert report.N0 >= 100
        assert report.ok


class TestClusteredSamples:
    def test_cluster_location(self, tb4):
        """Test that the cluster sits at the peak of phi_1, the origin."""
        f = BandlimitedFunction(tb4, [1.0, 0.0, 0.0, 0.0])
        samples = clustered_samples(f, 50, seed=1, width=0.1)

        assert np.all(np.abs(samples.points) <= 0.05 + 1e-12)

    def test_clipped_to_cube(self, tb4):
        f = synth_random(tb4, 8, 0.05, seed=4)
        samples = clustered_samples(f, 100, seed=2, width=1.0)

        assert np.all(np.abs(samples.points) <= 2.0)

    def test_deterministic(self, tb4):
        f = synth_random(tb4, 8, 0.05, seed=4)

        np.testing.assert_array_equal(
            clustered_samples(f, 10, seed=5).points,
            clustered_samples(f, 10, seed=5).points,
        )

    def test_invalid_width(self, tb4):
        f = synth_random(tb4, 8, 0.05, seed=4)

        with pytest.raises(InvalidArgumentError):
            clustered_samples(f, 10, seed=5, width=0.0)
