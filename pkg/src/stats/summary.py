"""
Per-user summaries of session outcomes and paired arm comparisons.

A session is one (arm, user, auc, rep) run over the drawn phrases. TTD is
the summed phrase time of a session in minutes, PPC its fraction of
completed phrases. Comparisons pair two arms user by user on the means of
these over repetitions.
"""

import logging
import math
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import asdict, dataclass, fields

import numpy as np

from src.core.exceptions import PairingError, StatisticsError

from .wilcoxon import wilcoxon_signed_rank

logger = logging.getLogger(__name__)

MS_PER_MINUTE = 60_000.0
COMPARISON_COLUMNS = ("metric", "n", "statistic", "p_two_sided", "mean_diff")


@dataclass(frozen=True)
class PhraseOutcome:
    """One row of the per-session CSV."""

    arm: str
    user: int
    auc: float
    rep: int
    phrase_id: int
    level: int
    completed: bool
    elapsed_ms: float
    epochs: int
    sequences: int
    trials: int

    @property
    def pairing_key(self) -> tuple[int, float, int, int]:
        return (self.user, self.auc, self.rep, self.phrase_id)

    @property
    def session_key(self) -> tuple[str, int, float, int]:
        return (self.arm, self.user, self.auc, self.rep)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "PhraseOutcome":
        """Parse a CSV row of strings."""
        try:
            return cls(
                arm=row["arm"],
                user=int(row["user"]),
                auc=float(row["auc"]),
                rep=int(row["rep"]),
                phrase_id=int(row["phrase_id"]),
                level=int(row["level"]),
                completed=row["completed"].strip().lower() in ("1", "true"),
                elapsed_ms=float(row["elapsed_ms"]),
                epochs=int(row["epochs"]),
                sequences=int(row["sequences"]),
                trials=int(row["trials"]),
            )
        except (KeyError, ValueError) as e:
            raise PairingError(f"Malformed session row {row}: {e}") from e


SESSION_COLUMNS = tuple(f.name for f in fields(PhraseOutcome))


@dataclass(frozen=True)
class GroupSummary:
    """TTD and PPC of one (arm, user) over its repetitions."""

    arm: str
    user: int
    auc: float
    sessions: int
    ttd_mean_min: float
    ttd_sd_min: float
    ppc_mean: float
    ppc_sd: float


SessionKey = tuple[str, int, float, int]


def session_metrics(outcomes: Iterable[PhraseOutcome]) -> dict[SessionKey, tuple[float, float]]:
    """(TTD minutes, PPC) per session key."""
    grouped: dict[SessionKey, list[PhraseOutcome]] = defaultdict(list)
    for outcome in outcomes:
        grouped[outcome.session_key].append(outcome)
    metrics = {}
    for key, phrases in grouped.items():
        ttd = sum(p.elapsed_ms for p in phrases) / MS_PER_MINUTE
        ppc = sum(1 for p in phrases if p.completed) / len(phrases)
        metrics[key] = (ttd, ppc)
    return metrics


def _sd(values: list[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def summarize_groups(outcomes: Iterable[PhraseOutcome]) -> list[GroupSummary]:
    """Per (arm, user) means and standard deviations over repetitions."""
    per_group: dict[tuple[str, int, float], list[tuple[float, float]]] = defaultdict(list)
    for (arm, user, auc_level, _rep), values in sorted(session_metrics(outcomes).items()):
        per_group[(arm, user, auc_level)].append(values)
    summaries = []
    for (arm, user, auc_level), values in sorted(per_group.items()):
        ttd = [v[0] for v in values]
        ppc = [v[1] for v in values]
        summaries.append(
            GroupSummary(
                arm=arm,
                user=user,
                auc=auc_level,
                sessions=len(values),
                ttd_mean_min=float(np.mean(ttd)),
                ttd_sd_min=_sd(ttd),
                ppc_mean=float(np.mean(ppc)),
                ppc_sd=_sd(ppc),
            )
        )
    return summaries


@dataclass(frozen=True)
class ComparisonRow:
    """Paired test of one metric between two arms."""

    metric: str
    n: int
    statistic: float
    p_two_sided: float
    mean_diff: float
    p_greater: float = math.nan
    p_less: float = math.nan

    def to_row(self) -> dict:
        return {name: getattr(self, name) for name in COMPARISON_COLUMNS}


def _check_pairing(a: list[PhraseOutcome], b: list[PhraseOutcome]) -> None:
    keys_a = {o.pairing_key for o in a}
    keys_b = {o.pairing_key for o in b}
    missing = sorted(keys_a ^ keys_b)
    if missing:
        raise PairingError(
            f"{len(missing)} pairing keys (user, auc, rep, phrase_id) appear in only one report",
            missing_keys=missing,
        )


def compare_arms(a: list[PhraseOutcome], b: list[PhraseOutcome]) -> list[ComparisonRow]:
    """
    Paired Wilcoxon tests of per-user mean TTD and mean PPC, a minus b.

    A metric whose test is impossible (for example all differences zero)
    is reported with NaN statistic and p.

    Raises:
        PairingError: the two outcome sets do not share their pairing keys
        StatisticsError: no metric could be tested
    """
    if not a or not b:
        raise PairingError("Cannot compare an empty report")
    _check_pairing(a, b)

    def per_user(outcomes: list[PhraseOutcome]) -> dict[int, GroupSummary]:
        return {s.user: s for s in summarize_groups(outcomes)}

    users_a, users_b = per_user(a), per_user(b)
    users = sorted(users_a)
    rows = []
    failures = []
    for metric, attr in (("ttd_minutes", "ttd_mean_min"), ("ppc", "ppc_mean")):
        x = np.array([getattr(users_a[u], attr) for u in users])
        y = np.array([getattr(users_b[u], attr) for u in users])
        mean_diff = float(np.mean(x - y))
        try:
            result = wilcoxon_signed_rank(x, y)
        except StatisticsError as e:
            logger.warning(f"Comparison of {metric} skipped: {e}")
            failures.append(f"{metric}: {e}")
            rows.append(
                ComparisonRow(
                    metric=metric,
                    n=int(np.count_nonzero(x - y)),
                    statistic=math.nan,
                    p_two_sided=math.nan,
                    mean_diff=mean_diff,
                )
            )
            continue
        rows.append(
            ComparisonRow(
                metric=metric,
                n=result.n,
                statistic=result.statistic,
                p_two_sided=result.p_two_sided,
                mean_diff=mean_diff,
                p_greater=result.p_greater,
                p_less=result.p_less,
            )
        )
    if len(failures) == len(rows):
        raise StatisticsError("No metric could be tested", details="; ".join(failures))
    return rows
