"""Tests for the Wilcoxon test, Beta intervals and arm comparisons."""

import math

import numpy as np
import pytest
from scipy import stats

from src.core.exceptions import PairingError, StatisticsError
from src.stats.beta import beta_fit_ci
from src.stats.summary import (
    PhraseOutcome,
    compare_arms,
    session_metrics,
    summarize_groups,
)
from src.stats.wilcoxon import wilcoxon_signed_rank


def _outcomes(arm: str, users: int, minutes_of, completed_of=lambda u, r, p: True):
    rows = []
    for user in range(users):
        for rep in range(2):
            for phrase in range(2):
                rows.append(
                    PhraseOutcome(
                        arm=arm,
                        user=user,
                        auc=0.8,
                        rep=rep,
                        phrase_id=10 * rep + phrase,
                        level=phrase + 1,
                        completed=completed_of(user, rep, phrase),
                        elapsed_ms=minutes_of(user, rep, phrase) * 60_000.0,
                        epochs=5,
                        sequences=10,
                        trials=140,
                    )
                )
    return rows


class TestWilcoxon:
    """Tests for the signed-rank test."""

    def test_six_positive_differences(self):
        """Test the exact two-sided p of 2/64 when all six differences are positive."""
        result = wilcoxon_signed_rank([2, 3, 4, 5, 6, 7], [1, 1, 1, 1, 1, 1])
        assert result.p_two_sided == 0.03125
        assert result.p_greater == pytest.approx(1 / 64)
        assert result.p_less == 1.0
        assert result.statistic == 0.0
        assert result.method == "exact"

    def test_symmetric_differences(self):
        result = wilcoxon_signed_rank([1, -1, 2, -2, 3, -3], [0] * 6)
        assert result.w_plus == result.w_minus
        assert result.p_two_sided == 1.0

    def test_matches_scipy_exact(self):
        rng = np.random.default_rng(0)
        a = rng.normal(0.3, 1, 12)
        b = rng.normal(0, 1, 12)
        ours = wilcoxon_signed_rank(a, b)
        reference = stats.wilcoxon(a, b, method="exact")
        assert ours.statistic == reference.statistic
        assert ours.p_two_sided == pytest.approx(reference.pvalue, rel=1e-9)

    def test_ties_use_average_ranks(self):
        result = wilcoxon_signed_rank([1, 1, -1, 2, 3], [0, 0, 0, 0, 0])
        assert result.w_minus == 2.0
        assert result.w_plus == 13.0

    def test_zero_differences_dropped(self):
        result = wilcoxon_signed_rank([0, 0, 1, 2, 3, 4, 5], [0, 0, 0, 0, 0, 0, 0])
        assert result.n == 5

    def test_all_zero(self):
        with pytest.raises(StatisticsError):
            wilcoxon_signed_rank([1, 2, 3], [1, 2, 3])

    def test_too_few_nonzero(self):
        with pytest.raises(StatisticsError):
            wilcoxon_signed_rank([1, 2, 3, 4], [0, 0, 0, 0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            wilcoxon_signed_rank([1, 2], [1])

    def test_affine_invariance(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=15), rng.normal(size=15)
        assert wilcoxon_signed_rank(a, b).p_two_sided == pytest.approx(
            wilcoxon_signed_rank(3 * a + 7, 3 * b + 7).p_two_sided
        )

    def test_exact_and_normal_agree_at_twenty(self):
        """Test that both null distributions give p within 0.02 at n = 20."""
        rng = np.random.default_rng(2)
        for _ in range(25):
            a, b = rng.normal(0.2, 1, 20), rng.normal(0, 1, 20)
            exact = wilcoxon_signed_rank(a, b, method="exact").p_two_sided
            normal = wilcoxon_signed_rank(a, b, method="normal").p_two_sided
            assert exact == pytest.approx(normal, abs=0.02)


class TestBetaFit:
    """Tests for the method-of-moments Beta interval."""

    def test_endpoints_invert_cdf(self):
        fit = beta_fit_ci([0.6, 0.8, 0.9, 0.7, 1.0, 0.5, 0.8], mass=0.90)
        assert fit.cdf(fit.lo) == pytest.approx(0.05, abs=1e-6)
        assert fit.cdf(fit.hi) == pytest.approx(0.95, abs=1e-6)
        assert fit.lo < fit.mean < fit.hi

    def test_moments(self):
        samples = np.array([0.2, 0.4, 0.5, 0.3])
        fit = beta_fit_ci(samples)
        m, v = samples.mean(), samples.var(ddof=1)
        assert fit.alpha / (fit.alpha + fit.beta) == pytest.approx(m)
        ab = fit.alpha + fit.beta
        assert fit.alpha * fit.beta / (ab**2 * (ab + 1)) == pytest.approx(v)

    def test_all_ones(self):
        fit = beta_fit_ci([1.0, 1.0, 1.0])
        assert (fit.lo, fit.hi) == (1.0, 1.0)
        assert fit.degenerate

    def test_symmetric_about_half(self):
        fit = beta_fit_ci([0.3, 0.7, 0.4, 0.6])
        assert fit.lo + fit.hi == pytest.approx(1.0, abs=1e-6)

    def test_width_shrinks_with_variance(self):
        wide = beta_fit_ci([0.3, 0.7, 0.4, 0.6])
        narrow = beta_fit_ci([0.45, 0.55, 0.48, 0.52])
        assert narrow.hi - narrow.lo < wide.hi - wide.lo

    def test_too_much_variance_degenerates(self):
        fit = beta_fit_ci([0.0, 1.0])
        assert fit.lo == fit.hi == 0.5

    @pytest.mark.parametrize("samples", [[0.5], [0.5, 1.5]])
    def test_invalid_samples(self, samples):
        with pytest.raises(ValueError):
            beta_fit_ci(samples)


class TestSummaries:
    def test_session_metrics(self):
        outcomes = _outcomes("a", 1, lambda u, r, p: 1.5, lambda u, r, p: p == 0)
        metrics = session_metrics(outcomes)
        assert metrics[("a", 0, 0.8, 0)] == (pytest.approx(3.0), 0.5)

    def test_group_summary(self):
        outcomes = _outcomes("a", 2, lambda u, r, p: 1.0 + r)
        groups = summarize_groups(outcomes)
        assert [(g.arm, g.user) for g in groups] == [("a", 0), ("a", 1)]
        assert groups[0].ttd_mean_min == pytest.approx(3.0)
        assert groups[0].ttd_sd_min == pytest.approx(math.sqrt(2.0))
        assert groups[0].ppc_mean == 1.0
        assert groups[0].sessions == 2

    def test_from_row_malformed(self):
        with pytest.raises(PairingError):
            PhraseOutcome.from_row({"arm": "a", "user": "x"})


class TestCompareArms:
    """Tests for paired arm comparisons."""

    def test_faster_arm(self):
        fast = _outcomes("fast", 6, lambda u, r, p: 1.0 + 0.1 * u)
        slow = _outcomes("slow", 6, lambda u, r, p: 2.0 + 0.2 * u)
        rows = {row.metric: row for row in compare_arms(fast, slow)}
        ttd = rows["ttd_minutes"]
        assert ttd.n == 6
        assert ttd.p_less == pytest.approx(1 / 64)
        assert ttd.p_two_sided == 0.03125
        assert ttd.mean_diff < 0
        assert math.isnan(rows["ppc"].p_two_sided)

    def test_row_columns(self):
        fast = _outcomes("fast", 6, lambda u, r, p: 1.0 + 0.1 * u)
        slow = _outcomes("slow", 6, lambda u, r, p: 2.0)
        row = compare_arms(fast, slow)[0].to_row()
        assert list(row) == ["metric", "n", "statistic", "p_two_sided", "mean_diff"]

    def test_missing_pairing_key(self):
        a = _outcomes("a", 6, lambda u, r, p: 1.0)
        b = _outcomes("b", 6, lambda u, r, p: 2.0)[1:]
        with pytest.raises(PairingError) as exc:
            compare_arms(a, b)
        assert exc.value.missing_keys == [(0, 0.8, 0, 0)]

    def test_identical_reports(self):
        a = _outcomes("a", 6, lambda u, r, p: 1.0)
        with pytest.raises(StatisticsError):
            compare_arms(a, a)

    def test_empty(self):
        with pytest.raises(PairingError):
            compare_arms([], _outcomes("b", 1, lambda u, r, p: 1.0))
