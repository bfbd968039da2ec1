"""Beta sampling, empirical CDFs, and the dominance check."""

import numpy as np
import pytest
from scipy import stats

from lendingdyn import (BetaSpec, ScoreDistribution, check_dominance,
                        empirical_cdf, read_score_csv, sample_beta,
                        write_score_csv)


class TestSampleBeta:
    def test_same_spec_reproduces(self):
        spec = BetaSpec(a=4, b=8, n=100, seed=7)
        d1 = sample_beta(spec)
        d2 = sample_beta(spec)
        assert np.array_equal(d1.scores, d2.scores)

    def test_different_seeds_differ(self):
        d1 = sample_beta(BetaSpec(a=4, b=8, n=100, seed=7))
        d2 = sample_beta(BetaSpec(a=4, b=8, n=100, seed=8))
        assert not np.array_equal(d1.scores, d2.scores)

    @pytest.mark.parametrize("a,b", [(1, 1), (4, 8), (3, 8)])
    def test_mean_within_three_se(self, a, b):
        n = 20000
        dist = sample_beta(BetaSpec(a=a, b=b, n=n, seed=11))
        true_mean = a / (a + b)
        true_var = a * b / ((a + b) ** 2 * (a + b + 1))
        se = np.sqrt(true_var / n)
        assert abs(dist.mean() - true_mean) <= 3 * se

    @pytest.mark.parametrize("a,b", [(4, 8), (8, 3)])
    def test_ks_distance_to_true_cdf(self, a, b):
        dist = sample_beta(BetaSpec(a=a, b=b, n=100_000, seed=13))
        grid = np.linspace(0, 1, 1001)
        ecdf = empirical_cdf(dist, grid)
        assert np.max(np.abs(ecdf - stats.beta.cdf(grid, a, b))) < 0.01

    def test_group_and_weight_carry_through(self):
        dist = sample_beta(BetaSpec(a=2, b=2, n=10, seed=0), group="D",
                           weight=2.5)
        assert dist.group == "D"
        assert dist.weight == 2.5

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            BetaSpec(a=0.0, b=1.0, n=10, seed=0)
        with pytest.raises(ValueError):
            BetaSpec(a=1.0, b=1.0, n=0, seed=0)


class TestEmpiricalCdf:
    def test_worked_values(self):
        dist = ScoreDistribution("A", np.array([0.2, 0.4, 0.6]))
        assert empirical_cdf(dist, 0.5) == pytest.approx(2 / 3)
        assert empirical_cdf(dist, 0.4) == pytest.approx(2 / 3)
        assert empirical_cdf(dist, 0.39) == pytest.approx(1 / 3)
        assert empirical_cdf(dist, 0.0) == 0.0
        assert empirical_cdf(dist, 1.0) == 1.0

    def test_monotone_and_bounded(self):
        dist = sample_beta(BetaSpec(a=3, b=4, n=500, seed=3))
        grid = np.linspace(0, 1, 201)
        vals = empirical_cdf(dist, grid)
        assert np.all(np.diff(vals) >= 0)
        assert vals.min() >= 0.0 and vals.max() <= 1.0


class TestDominance:
    def test_distribution_dominates_itself(self):
        dist = sample_beta(BetaSpec(a=4, b=8, n=200, seed=1))
        report = check_dominance(dist, dist)
        assert report.dominates
        assert report.violations == ()

    def test_dominant_pair(self, beta_pair):
        dist_a, dist_d = beta_pair
        report = check_dominance(dist_a, dist_d, step=0.01)
        assert report.dominates
        assert report.grid_step == 0.01

    def test_swapped_pair_fails_with_witnesses(self, beta_pair):
        dist_a, dist_d = beta_pair
        report = check_dominance(dist_d, dist_a, step=0.01)
        assert not report.dominates
        assert len(report.violations) > 0
        for x, fa, fd in report.violations:
            assert 0.0 <= x <= 1.0
            assert fa > fd

    def test_restricted_interval(self, beta_pair):
        dist_a, dist_d = beta_pair
        full = check_dominance(dist_d, dist_a, step=0.01)
        upper = check_dominance(dist_d, dist_a, step=0.01,
                                interval=(0.95, 1.0))
        assert not full.dominates
        # near 1 both empirical CDFs have reached 1, so no witnesses remain
        assert upper.dominates

    def test_bad_step_rejected(self, beta_pair):
        dist_a, dist_d = beta_pair
        with pytest.raises(ValueError):
            check_dominance(dist_a, dist_d, step=0.0)


class TestScoreCsv:
    def test_round_trip(self, tmp_path):
        dist = sample_beta(BetaSpec(a=4, b=8, n=50, seed=2), group="D")
        path = tmp_path / "scores.csv"
        write_score_csv(path, dist)
        back = read_score_csv(path, group="D")
        assert back.group == "D"
        assert np.array_equal(back.scores, dist.scores)

    def test_headerless_file_accepted(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("0.25\n0.5\n0.75\n")
        back = read_score_csv(path)
        assert np.array_equal(back.scores, [0.25, 0.5, 0.75])

    def test_non_numeric_body_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("score\n0.25\noops\n")
        with pytest.raises(ValueError, match="oops"):
            read_score_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("score\n")
        with pytest.raises(ValueError, match="no scores"):
            read_score_csv(path)

    def test_out_of_range_scores_rejected(self, tmp_path):
        path = tmp_path / "range.csv"
        path.write_text("score\n1.5\n")
        with pytest.raises(ValueError):
            read_score_csv(path)
