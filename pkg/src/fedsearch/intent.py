"""Searcher intent inference.

Profile and recent-activity signals feed one independent binary logistic
regression per intent; a batch refresh rewrites every member's intent
scores and active set, mirroring a daily update job.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .domain import (
    ActivityKind,
    DEFAULT_INTENTS,
    DEFAULT_INTENT_THRESHOLD,
    Intent,
    Member,
)
from .errors import DegenerateLabels
from .scorer import Hyperparams, Label, ScorerModel, TrainingExample, score, train_logreg

RECRUITER_TERMS = ("recruiter", "talent", "sourcer", "hiring manager")

DEFAULT_WINDOW_DAYS = 28
FINAL_YEAR_MONTHS = 12

SIGNAL_FIELDS = (
    "title_has_recruiter_term",
    "is_final_year_student",
    "recent_job_searches",
    "recent_job_applies",
    "recent_content_views",
    "recent_profile_views",
    "recent_group_joins",
)

_COUNT_SIGNALS = {
    ActivityKind.JobSearch: "recent_job_searches",
    ActivityKind.JobApply: "recent_job_applies",
    ActivityKind.ContentView: "recent_content_views",
    ActivityKind.ProfileView: "recent_profile_views",
    ActivityKind.GroupJoin: "recent_group_joins",
}


def extract_intent_signals(
    member: Member, now: int, window_days: int = DEFAULT_WINDOW_DAYS
) -> dict[str, float]:
    """Signal vector over the (now - window, now] activity window."""
    signals = {f: 0.0 for f in SIGNAL_FIELDS}
    title = member.title.lower()
    if any(term in title for term in RECRUITER_TERMS):
        signals["title_has_recruiter_term"] = 1.0
    if (
        member.is_student
        and member.months_to_graduation is not None
        and member.months_to_graduation <= FINAL_YEAR_MONTHS
    ):
        signals["is_final_year_student"] = 1.0
    lo = now - window_days * 86400
    for event in member.activities:
        if lo < event.timestamp <= now:
            name = _COUNT_SIGNALS.get(event.kind)
            if name:
                signals[name] += 1.0
    return signals


@dataclass(frozen=True)
class IntentModel:
    """One binary logistic model per intent in the taxonomy."""

    per_intent: dict[Intent, ScorerModel]
    window_days: int = DEFAULT_WINDOW_DAYS
    threshold: float = DEFAULT_INTENT_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "per_intent": {i: m.to_dict() for i, m in sorted(self.per_intent.items())},
            "window_days": self.window_days,
            "threshold": self.threshold,
        }

    @staticmethod
    def from_dict(d: dict) -> "IntentModel":
        return IntentModel(
            per_intent={i: ScorerModel.from_dict(m) for i, m in d["per_intent"].items()},
            window_days=int(d["window_days"]),
            threshold=float(d["threshold"]),
        )


def train_intent_model(
    labeled: list[tuple[Member, frozenset[Intent] | set[Intent]]],
    now: int,
    hyperparams: Hyperparams = Hyperparams(),
    intents: tuple[Intent, ...] = DEFAULT_INTENTS,
    window_days: int = DEFAULT_WINDOW_DAYS,
    threshold: float = DEFAULT_INTENT_THRESHOLD,
) -> IntentModel:
    if len(labeled) < 2:
        raise ValueError("need at least 2 labeled members")
    rows = [
        (extract_intent_signals(m, now, window_days), true_set)
        for m, true_set in labeled
    ]
    vocabulary = sorted(SIGNAL_FIELDS)
    per_intent = {}
    for intent in intents:
        examples = []
        for i, (signals, true_set) in enumerate(rows):
            label = Label.Positive if intent in true_set else Label.Negative
            fv = {k: v for k, v in signals.items() if v != 0.0}
            examples.append(TrainingExample(fv, label, serp_id=f"member-{i}", position=0))
        if len({ex.label for ex in examples}) < 2:
            raise DegenerateLabels(intent)
        per_intent[intent] = train_logreg(examples, hyperparams, vocabulary)
    return IntentModel(per_intent, window_days, threshold)


def infer_intents(
    member: Member, model: IntentModel, now: int
) -> tuple[dict[Intent, float], frozenset[Intent]]:
    signals = extract_intent_signals(member, now, model.window_days)
    fv = {k: v for k, v in signals.items() if v != 0.0}
    scores = {intent: score(m, fv) for intent, m in model.per_intent.items()}
    active = frozenset(i for i, s in scores.items() if s >= model.threshold)
    return scores, active


def batch_update(
    population: list[Member], model: IntentModel, now: int
) -> list[Member]:
    """Pure daily refresh: every member's scores and active set recomputed."""
    out = []
    for member in population:
        scores, _ = infer_intents(member, model, now)
        out.append(member.with_intents(scores, model.threshold))
    return out


def save_intent_model(model: IntentModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f, ensure_ascii=False, sort_keys=True, indent=1)


def load_intent_model(path: str | Path) -> IntentModel:
    with open(path, "r", encoding="utf-8") as f:
        return IntentModel.from_dict(json.load(f))
