"""Tests for the Monte-Carlo study runner."""

import os

import numpy as np
import pytest

from src.config import SimConfig
from src.core.exceptions import ConfigError, InfeasibleQueryError
from src.evidence.density import EvidenceModel, KernelDensity
from src.paradigms.arms import ArmSpec, Paradigm
from src.simulation.study import (
    PPC_BY_AUC_COLUMNS,
    TTD_SCATTER_COLUMNS,
    build_users,
    run_study,
)
from src.stats.summary import summarize_groups
from src.stats.wilcoxon import wilcoxon_signed_rank

RSVP_ARMS = [
    ArmSpec("rsvp_random", Paradigm.RSVP_RANDOM),
    ArmSpec("arsvp", Paradigm.ARSVP),
]

# Twelve simulated users: the sweep plus repeats of mid-range levels
STUDY_AUC_LEVELS = [0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.70, 0.75, 0.80, 0.85, 0.75, 0.80]


@pytest.fixture
def quick_config():
    return SimConfig(max_sequences=3, phrase_time_budget_ms=60_000.0)


def _small_study(english_lm, phrase_pool, config, workers=1, **kwargs):
    params = dict(
        arms=RSVP_ARMS,
        auc_levels=[0.9, 0.75],
        reps=2,
        lm=english_lm,
        phrase_pool=phrase_pool,
        sim_config=config,
        backspace_prob=0.05,
        seed=5,
        phrases_per_level=1,
        workers=workers,
    )
    params.update(kwargs)
    return run_study(**params)


class TestBuildUsers:
    def test_one_user_per_level(self):
        users = build_users([0.7, 0.9])
        assert [u.user for u in users] == [0, 1]
        assert [u.auc for u in users] == [0.7, 0.9]
        assert users[1].sigma.sigma_plus > users[0].sigma.sigma_plus

    def test_extra_models_follow_levels(self):
        kde = EvidenceModel(
            KernelDensity(np.array([0.5, 1.0, 1.5]), 0.3),
            KernelDensity(np.array([-1.0, -0.5, 0.0]), 0.3),
        )
        users = build_users([0.8], [kde])
        assert len(users) == 2
        assert 0.5 < users[1].auc < 1.0


class TestRunStudy:
    """Tests for study orchestration on a small grid."""

    def test_table_shapes(self, english_lm, phrase_pool, quick_config):
        report = _small_study(english_lm, phrase_pool, quick_config)
        assert len(report.sessions) == 2 * 2 * 2
        assert report.phrases_per_session == 5
        assert len(report.outcomes()) == 8 * 5
        scatter = report.ttd_scatter()
        assert len(scatter) == 2
        assert all(tuple(row) == TTD_SCATTER_COLUMNS for row in scatter)
        ppc = report.ppc_by_auc()
        assert [(r["arm"], r["auc"]) for r in ppc] == [
            ("rsvp_random", 0.75),
            ("rsvp_random", 0.9),
            ("arsvp", 0.75),
            ("arsvp", 0.9),
        ]
        assert all(tuple(row) == PPC_BY_AUC_COLUMNS for row in ppc)
        assert all(0.0 <= r["ppc_lo"] <= r["ppc_hi"] <= 1.0 for r in ppc)

    def test_arms_share_phrases(self, english_lm, phrase_pool, quick_config):
        """Test that every arm of a cell types the same phrase list."""
        report = _small_study(english_lm, phrase_pool, quick_config)
        by_cell = {}
        for s in report.sessions:
            ids = [r.phrase_id for r in s.records]
            by_cell.setdefault((s.user, s.rep), set()).add(tuple(ids))
        assert all(len(v) == 1 for v in by_cell.values())

    def test_ttd_is_sum_of_epochs(self, english_lm, phrase_pool, quick_config):
        report = _small_study(english_lm, phrase_pool, quick_config, reps=1)
        for s in report.sessions:
            total = sum(sum(r.epoch_ms) for r in s.records)
            assert s.ttd_minutes == pytest.approx(total / 60_000.0, rel=1e-12)
            assert 0.0 <= s.ppc <= 1.0

    def test_seeded(self, english_lm, phrase_pool, quick_config):
        a = _small_study(english_lm, phrase_pool, quick_config, reps=1)
        b = _small_study(english_lm, phrase_pool, quick_config, reps=1)
        assert a.sessions == b.sessions

    def test_independent_of_worker_count(self, english_lm, phrase_pool, quick_config):
        serial = _small_study(english_lm, phrase_pool, quick_config, workers=1)
        parallel = _small_study(english_lm, phrase_pool, quick_config, workers=2)
        assert serial.sessions == parallel.sessions

    def test_aggregates(self, english_lm, phrase_pool, quick_config):
        report = _small_study(english_lm, phrase_pool, quick_config, reps=1)
        summary = report.aggregates()
        assert set(summary["arms"]) == {"rsvp_random", "arsvp"}
        assert summary["arms"]["arsvp"]["total_phrases"] == 2 * 5
        assert len(summary["users"]) == 2

    def test_duplicate_arm_names(self, english_lm, phrase_pool, quick_config):
        arms = [ArmSpec("x", Paradigm.SCP), ArmSpec("x", Paradigm.ASCP)]
        with pytest.raises(ConfigError):
            _small_study(english_lm, phrase_pool, quick_config, arms=arms)

    def test_infeasible_arm_fails_before_running(self, english_lm, phrase_pool, quick_config):
        arms = [ArmSpec("long", Paradigm.ARSVP, trials_per_sequence=29)]
        with pytest.raises(InfeasibleQueryError):
            _small_study(english_lm, phrase_pool, quick_config, arms=arms)

    def test_reps_must_be_positive(self, english_lm, phrase_pool, quick_config):
        with pytest.raises(ConfigError):
            _small_study(english_lm, phrase_pool, quick_config, reps=0)


def _full_study(english_lm, phrase_pool, arms):
    return run_study(
        arms=arms,
        auc_levels=STUDY_AUC_LEVELS,
        reps=20,
        lm=english_lm,
        phrase_pool=phrase_pool,
        sim_config=SimConfig(),
        backspace_prob=0.05,
        seed=2016,
        phrases_per_level=2,
        workers=os.cpu_count() or 1,
    )


def _per_user(report, arm, attr, auc_range=(0.0, 1.0)):
    groups = {g.user: g for g in summarize_groups(report.outcomes()) if g.arm == arm}
    users = sorted(u for u, g in groups.items() if auc_range[0] <= g.auc <= auc_range[1])
    return np.array([getattr(groups[u], attr) for u in users])


@pytest.mark.slow
class TestDirectionalEffects:
    """Active arms against their baselines on twelve simulated users."""

    def test_active_rsvp_beats_random(self, english_lm, phrase_pool):
        report = _full_study(english_lm, phrase_pool, RSVP_ARMS)
        ttd = wilcoxon_signed_rank(
            _per_user(report, "arsvp", "ttd_mean_min"),
            _per_user(report, "rsvp_random", "ttd_mean_min"),
        )
        assert ttd.p_less < 0.05
        band = (0.7, 0.9)
        ppc = wilcoxon_signed_rank(
            _per_user(report, "arsvp", "ppc_mean", band),
            _per_user(report, "rsvp_random", "ppc_mean", band),
        )
        assert ppc.p_greater < 0.05

    def test_active_scp_beats_full_scp(self, english_lm, phrase_pool):
        arms = [ArmSpec("scp", Paradigm.SCP), ArmSpec("ascp", Paradigm.ASCP)]
        report = _full_study(english_lm, phrase_pool, arms)
        ttd = wilcoxon_signed_rank(
            _per_user(report, "ascp", "ttd_mean_min"),
            _per_user(report, "scp", "ttd_mean_min"),
        )
        assert ttd.p_less < 0.05

    def test_alp_beats_rcp(self, english_lm, phrase_pool):
        arms = [ArmSpec("rcp", Paradigm.RCP), ArmSpec("alp", Paradigm.ALP)]
        report = _full_study(english_lm, phrase_pool, arms)
        ttd = wilcoxon_signed_rank(
            _per_user(report, "alp", "ttd_mean_min"),
            _per_user(report, "rcp", "ttd_mean_min"),
        )
        assert ttd.p_less < 0.05
        alp_ppc = _per_user(report, "alp", "ppc_mean").mean()
        rcp_ppc = _per_user(report, "rcp", "ppc_mean").mean()
        assert alp_ppc >= rcp_ppc - 0.02

    def test_ppc_rises_with_auc(self, english_lm, phrase_pool):
        from scipy import stats

        report = _full_study(english_lm, phrase_pool, RSVP_ARMS)
        rows = [r for r in report.ppc_by_auc() if r["arm"] == "arsvp"]
        rho = stats.spearmanr([r["auc"] for r in rows], [r["ppc_mean"] for r in rows]).statistic
        assert rho > 0.8
