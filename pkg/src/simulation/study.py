"""
Monte-Carlo study: arms x simulated users x repetitions.

Each (user, rep) cell draws one phrase set (2 per difficulty level by
default) and types it with every arm. Random streams are derived from
(seed, user, rep, phrase) with numpy SeedSequence, so all arms of a cell
see the same phrases and the same evidence stream; query streams add a key
for the arm. Cells are independent and may run in a process pool; results
are reassembled in cell order, so the report does not depend on the
worker count.

Example usage:
    report = run_study(
        arms=[ArmSpec("rsvp_random", Paradigm.RSVP_RANDOM), ArmSpec("arsvp", Paradigm.ARSVP)],
        auc_levels=[0.7, 0.8],
        reps=20,
        lm=lm,
        phrase_pool=load_phrase_pool(DEFAULT_PHRASES),
        sim_config=SimConfig(),
        backspace_prob=0.05,
        seed=0,
    )
"""

import logging
import math
import zlib
from collections import defaultdict
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.config import SimConfig
from src.core.exceptions import ConfigError, EvidenceModelError
from src.evidence.density import (
    DEFAULT_QUADRATURE_POINTS,
    EvidenceModel,
    SigmaEstimates,
    evidence_auc,
    gaussian_evidence_model,
    sigma_point_estimates,
)
from src.language.ngram import NgramModel
from src.language.phrases import PhraseEntry, bucket_phrases, draw_session_phrases
from src.paradigms.arms import BASELINE_OF, ArmSpec, build_query_source, validate_arm
from src.stats.beta import beta_fit_ci
from src.stats.summary import PhraseOutcome, summarize_groups

from .copy_phrase import PhraseRecord, PhraseTask, SimulatedUser, type_phrase

logger = logging.getLogger(__name__)

# Stream tags mixed into the SeedSequence entropy
_PHRASE_STREAM = 1
_EVIDENCE_STREAM = 2
_QUERY_STREAM = 3

DEFAULT_REPS = 20
DEFAULT_PHRASES_PER_LEVEL = 2

TTD_SCATTER_COLUMNS = (
    "baseline",
    "active",
    "user",
    "auc",
    "baseline_ttd_mean",
    "baseline_ttd_sd",
    "active_ttd_mean",
    "active_ttd_sd",
)
PPC_BY_AUC_COLUMNS = ("arm", "auc", "n", "ppc_mean", "ppc_lo", "ppc_hi")


@dataclass(frozen=True)
class SessionReport:
    """One arm typing one phrase set for one (user, rep)."""

    arm: str
    user: int
    auc: float
    rep: int
    records: tuple[PhraseRecord, ...]

    @property
    def ttd_minutes(self) -> float:
        return sum(r.elapsed_ms for r in self.records) / 60_000.0

    @property
    def ppc(self) -> float:
        if not self.records:
            return 0.0
        return sum(1 for r in self.records if r.completed) / len(self.records)

    def outcomes(self) -> list[PhraseOutcome]:
        return [
            PhraseOutcome(
                arm=self.arm,
                user=self.user,
                auc=self.auc,
                rep=self.rep,
                phrase_id=r.phrase_id,
                level=r.level,
                completed=r.completed,
                elapsed_ms=r.elapsed_ms,
                epochs=r.epochs,
                sequences=r.sequences,
                trials=r.trials,
            )
            for r in self.records
        ]


@dataclass(frozen=True)
class UserProfile:
    """A simulated user with its evidence model and sigma estimates."""

    user: int
    auc: float
    model: EvidenceModel
    sigma: SigmaEstimates


@dataclass
class StudyReport:
    """All sessions of a study plus the derived tables."""

    arms: list[ArmSpec]
    users: list[UserProfile]
    reps: int
    seed: int
    phrases_per_session: int
    sessions: list[SessionReport] = field(default_factory=list)

    def outcomes(self) -> list[PhraseOutcome]:
        return [o for s in self.sessions for o in s.outcomes()]

    def aggregates(self) -> dict:
        """Per-arm TTD and PPC summary plus the simulated users."""
        arms = {}
        for arm in self.arms:
            sessions = [s for s in self.sessions if s.arm == arm.name]
            ttd = [s.ttd_minutes for s in sessions]
            ppc = [s.ppc for s in sessions]
            arms[arm.name] = {
                "paradigm": arm.paradigm.value,
                "sessions": len(sessions),
                "mean_ttd_minutes": float(np.mean(ttd)) if ttd else math.nan,
                "sd_ttd_minutes": float(np.std(ttd, ddof=1)) if len(ttd) > 1 else 0.0,
                "mean_ppc": float(np.mean(ppc)) if ppc else math.nan,
                "completed_phrases": sum(1 for s in sessions for r in s.records if r.completed),
                "total_phrases": sum(len(s.records) for s in sessions),
            }
        return {
            "arms": arms,
            "arm_specs": [a.to_dict() for a in self.arms],
            "users": [
                {"user": u.user, "auc": u.auc, **u.sigma.to_dict()} for u in self.users
            ],
            "reps": self.reps,
            "phrases_per_session": self.phrases_per_session,
        }

    def ttd_scatter(self) -> list[dict]:
        """
        Mean and standard deviation of TTD per user, baseline arm against
        its active counterpart, for every such pair present in the study.
        """
        summaries = {(s.arm, s.user): s for s in summarize_groups(self.outcomes())}
        by_paradigm = {}
        for arm in self.arms:
            by_paradigm.setdefault(arm.paradigm, arm)
        rows = []
        for arm in self.arms:
            baseline_paradigm = BASELINE_OF.get(arm.paradigm)
            if baseline_paradigm not in by_paradigm:
                continue
            baseline = by_paradigm[baseline_paradigm]
            for user in self.users:
                b = summaries.get((baseline.name, user.user))
                a = summaries.get((arm.name, user.user))
                if a is None or b is None:
                    continue
                rows.append(
                    {
                        "baseline": baseline.name,
                        "active": arm.name,
                        "user": user.user,
                        "auc": user.auc,
                        "baseline_ttd_mean": b.ttd_mean_min,
                        "baseline_ttd_sd": b.ttd_sd_min,
                        "active_ttd_mean": a.ttd_mean_min,
                        "active_ttd_sd": a.ttd_sd_min,
                    }
                )
        return rows

    def ppc_by_auc(self, mass: float = 0.90) -> list[dict]:
        """Mean session PPC per (arm, AUC) with a Beta interval."""
        samples: dict[tuple[str, float], list[float]] = defaultdict(list)
        for s in self.sessions:
            samples[(s.arm, s.auc)].append(s.ppc)
        rows = []
        arm_order = {a.name: i for i, a in enumerate(self.arms)}
        ordered = sorted(samples.items(), key=lambda kv: (arm_order[kv[0][0]], kv[0][1]))
        for (arm, auc_level), values in ordered:
            mean = float(np.mean(values))
            if len(values) >= 2:
                fit = beta_fit_ci(values, mass=mass)
                lo, hi = fit.lo, fit.hi
            else:
                lo = hi = mean
            rows.append(
                {
                    "arm": arm,
                    "auc": auc_level,
                    "n": len(values),
                    "ppc_mean": mean,
                    "ppc_lo": lo,
                    "ppc_hi": hi,
                }
            )
        return rows


@dataclass(frozen=True)
class _StudyContext:
    lm: NgramModel
    buckets: dict[int, list[PhraseEntry]]
    arms: tuple[ArmSpec, ...]
    users: tuple[UserProfile, ...]
    sim_config: SimConfig
    backspace_prob: float
    phrases_per_level: int
    seed: int


_WORKER_CONTEXT: Optional[_StudyContext] = None


def _init_worker(context: _StudyContext) -> None:
    global _WORKER_CONTEXT
    _WORKER_CONTEXT = context


def _run_cell_in_worker(cell: tuple[int, int]) -> list[SessionReport]:
    assert _WORKER_CONTEXT is not None, "worker context not initialized"
    return run_cell(_WORKER_CONTEXT, *cell)


def _arm_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


def run_cell(context: _StudyContext, user_index: int, rep: int) -> list[SessionReport]:
    """Type one drawn phrase set with every arm for one (user, rep)."""
    profile = context.users[user_index]
    seed = context.seed
    entries = draw_session_phrases(
        context.buckets, context.phrases_per_level, _rng(seed, user_index, rep, _PHRASE_STREAM)
    )
    user = SimulatedUser(user_id=profile.user, model=profile.model, auc=profile.auc)
    sim = context.sim_config
    vocab = context.lm.vocabulary

    sessions = []
    for arm in context.arms:
        records = []
        for i, entry in enumerate(entries):
            query_source = build_query_source(
                arm,
                vocab,
                profile.sigma.log_sigma_plus if arm.active else 0.0,
                _rng(seed, user_index, rep, i, _QUERY_STREAM, _arm_key(arm.name)),
                sim.trials_per_sequence,
            )
            task = PhraseTask(
                phrase_id=entry.phrase_id,
                level=entry.level,
                context=entry.context,
                goal=entry.goal,
                time_budget_ms=sim.phrase_time_budget_ms,
                max_consecutive_errors=sim.max_consecutive_errors,
            )
            records.append(
                type_phrase(
                    task,
                    user,
                    query_source,
                    context.lm,
                    sim,
                    context.backspace_prob,
                    _rng(seed, user_index, rep, i, _EVIDENCE_STREAM),
                    arm.sequence_length(len(vocab), sim.trials_per_sequence),
                )
            )
        sessions.append(
            SessionReport(
                arm=arm.name,
                user=profile.user,
                auc=profile.auc,
                rep=rep,
                records=tuple(records),
            )
        )
    return sessions


def build_users(
    auc_levels: Sequence[float],
    evidence_models: Sequence[EvidenceModel] = (),
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS,
) -> list[UserProfile]:
    """One Gaussian user per AUC level, then one user per supplied model."""
    models = [gaussian_evidence_model(a, quadrature_points) for a in auc_levels]
    models.extend(evidence_models)
    users = []
    for index, model in enumerate(models):
        sigma = sigma_point_estimates(model)
        auc_level = round(evidence_auc(model), 6)
        users.append(UserProfile(user=index, auc=auc_level, model=model, sigma=sigma))
    return users


def run_study(
    arms: Sequence[ArmSpec],
    auc_levels: Sequence[float],
    reps: int,
    lm: NgramModel,
    phrase_pool: Sequence[PhraseEntry],
    sim_config: SimConfig,
    backspace_prob: float,
    seed: int = 0,
    phrases_per_level: int = DEFAULT_PHRASES_PER_LEVEL,
    workers: int = 1,
    evidence_models: Sequence[EvidenceModel] = (),
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS,
) -> StudyReport:
    """
    Run every arm for every (user, rep) cell.

    Arms, evidence models and the phrase pool are validated before any
    session runs.

    Raises:
        ConfigError: bad reps, duplicate arm names or a pool too small to draw from
        InfeasibleQueryError, CodebookError: an arm that cannot build sequences
        EvidenceModelError: an active arm paired with a user whose sigma_plus < 1
    """
    if reps < 1:
        raise ConfigError(f"reps must be >= 1, got {reps}", key="reps")
    if not arms:
        raise ConfigError("A study needs at least one arm", key="arms")
    names = [a.name for a in arms]
    if len(set(names)) != len(names):
        raise ConfigError(f"Arm names must be unique: {names}", key="arms")
    if not auc_levels and not evidence_models:
        raise ConfigError("A study needs at least one simulated user", key="auc_levels")

    vocab = lm.vocabulary
    for arm in arms:
        validate_arm(arm, vocab, sim_config.trials_per_sequence)

    users = build_users(auc_levels, evidence_models, quadrature_points)
    if any(a.active for a in arms):
        for u in users:
            if u.sigma.log_sigma_plus < -1e-6:
                raise EvidenceModelError(
                    f"User {u.user} has sigma_plus = {u.sigma.sigma_plus:.4g} < 1; "
                    "active arms need separated evidence classes"
                )

    buckets = bucket_phrases(lm, list(phrase_pool))
    for level, pool in buckets.items():
        if len(pool) < phrases_per_level:
            raise ConfigError(
                f"Difficulty level {level} holds {len(pool)} phrases, need {phrases_per_level}",
                key="phrases_per_level",
            )

    context = _StudyContext(
        lm=lm,
        buckets=buckets,
        arms=tuple(arms),
        users=tuple(users),
        sim_config=sim_config,
        backspace_prob=backspace_prob,
        phrases_per_level=phrases_per_level,
        seed=seed,
    )
    cells = [(u, rep) for u in range(len(users)) for rep in range(reps)]
    logger.info(
        f"Running {len(arms)} arms x {len(users)} users x {reps} reps "
        f"({len(cells) * len(arms)} sessions, {workers} workers)"
    )

    if workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(context,)
        ) as pool:
            results = pool.map(_run_cell_in_worker, cells)
            cell_sessions = _log_progress(cells, results, users, reps)
    else:
        cell_sessions = _log_progress(
            cells, (run_cell(context, u, rep) for u, rep in cells), users, reps
        )

    arm_order = {name: i for i, name in enumerate(names)}
    sessions = sorted(
        (s for group in cell_sessions for s in group),
        key=lambda s: (arm_order[s.arm], s.user, s.rep),
    )
    return StudyReport(
        arms=list(arms),
        users=users,
        reps=reps,
        seed=seed,
        phrases_per_session=phrases_per_level * len(buckets),
        sessions=sessions,
    )


def _log_progress(cells, results, users: list[UserProfile], reps: int) -> list[list[SessionReport]]:
    collected = []
    per_user: dict[int, list[SessionReport]] = defaultdict(list)
    for (user_index, rep), sessions in zip(cells, results):
        collected.append(sessions)
        per_user[user_index].extend(sessions)
        if rep == reps - 1:
            by_arm: dict[str, list[float]] = defaultdict(list)
            for s in per_user.pop(user_index):
                by_arm[s.arm].append(s.ttd_minutes)
            summary = ", ".join(f"{arm} {np.mean(v):.2f} min" for arm, v in by_arm.items())
            logger.info(f"User {user_index} (AUC {users[user_index].auc:.3f}) done: {summary}")
    return collected
