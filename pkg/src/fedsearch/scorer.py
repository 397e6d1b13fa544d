"""The federated scorer.

Covers the full training loop: skip-above label extraction from click
logs, the randomized SERP construction used for unbiased collection,
L2-regularized logistic regression, and probability scoring.
"""
from __future__ import annotations

import hashlib
import json
import math
import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .domain import (
    ClickKind,
    ClickLogEntry,
    Member,
    PrimaryIndividual,
    SecondaryBlock,
    Serp,
    VERTICAL_ORDER,
    Vertical,
)
from .errors import DegenerateLabels, NoEligibleVertical, NonFiniteLoss
from .features import FeatureVector
from .vertical_engine import (
    DEFAULT_BLOCK_TOP_M,
    DEFAULT_K_BLOCK,
    VerticalResultList,
    block_score,
)


class Label(str, Enum):
    Positive = "Positive"
    Negative = "Negative"


@dataclass(frozen=True)
class TrainingExample:
    features: FeatureVector
    label: Label
    serp_id: str
    position: int


@dataclass(frozen=True)
class Hyperparams:
    l2_lambda: float = 1e-4
    learning_rate: float = 0.1
    epochs: int = 50
    batch_size: int = 64
    seed: int = 0


@dataclass(frozen=True)
class ScorerModel:
    weights: dict[str, float]
    intercept: float
    vocabulary_hash: str
    hyperparams: Hyperparams = field(default_factory=Hyperparams)

    def to_dict(self) -> dict:
        return {
            "weights": dict(sorted(self.weights.items())),
            "intercept": self.intercept,
            "vocabulary_hash": self.vocabulary_hash,
            "hyperparams": {
                "l2_lambda": self.hyperparams.l2_lambda,
                "learning_rate": self.hyperparams.learning_rate,
                "epochs": self.hyperparams.epochs,
                "batch_size": self.hyperparams.batch_size,
                "seed": self.hyperparams.seed,
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "ScorerModel":
        return ScorerModel(
            weights={k: float(v) for k, v in d["weights"].items()},
            intercept=float(d["intercept"]),
            vocabulary_hash=d["vocabulary_hash"],
            hyperparams=Hyperparams(**d["hyperparams"]),
        )


def vocabulary_hash(vocabulary: list[str]) -> str:
    return hashlib.sha256("\n".join(vocabulary).encode("utf-8")).hexdigest()


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def label_clicklog(entry: ClickLogEntry) -> list[TrainingExample]:
    """Skip-above labeling.

    Clicked positions are positive; unclicked positions above the last
    click are negative; everything below the last click is dropped since
    the member may simply not have seen it. No clicks, no examples.
    Feature vectors are attached later by build_training_set, which has
    the member and keyword-intent context.
    """
    if not entry.clicks:
        return []
    clicked = {c.position for c in entry.clicks}
    last = max(clicked)
    examples = []
    for pos in range(last + 1):
        label = Label.Positive if pos in clicked else Label.Negative
        examples.append(
            TrainingExample(
                features={},  # filled by build_training_set with full context
                label=label,
                serp_id=entry.serp.serp_id,
                position=pos,
            )
        )
    return examples


def build_training_set(
    logs: list[ClickLogEntry],
    table,
    members: dict[str, Member],
) -> list[TrainingExample]:
    """Attach assembled feature vectors to skip-above labels."""
    from .features import assemble

    out = []
    for entry in logs:
        member = members.get(entry.serp.member_id)
        intents = member.active_intents if member is not None else frozenset()
        for ex in label_clicklog(entry):
            fv = assemble(entry.serp.query, intents, entry.serp.items[ex.position], table)
            out.append(TrainingExample(fv, ex.label, ex.serp_id, ex.position))
    return out


def randomize_serp(
    query: str,
    member: Member,
    vertical_results: dict[Vertical, VerticalResultList],
    rng_seed: int,
    block_top_m: int = DEFAULT_BLOCK_TOP_M,
    k_block: int = DEFAULT_K_BLOCK,
) -> Serp:
    """Build the randomization-experiment SERP.

    Picks the primary uniformly among verticals that returned results and
    drops each remaining one, as a block, into a uniformly random gap of
    the primary ranking. Primary order is never changed. Deterministic for
    a fixed seed.
    """
    eligible = sorted(
        (v for v, r in vertical_results.items() if r.results),
        key=lambda v: VERTICAL_ORDER[v],
    )
    if not eligible:
        raise NoEligibleVertical("no vertical returned results")
    rng = np.random.default_rng(rng_seed)
    primary = eligible[int(rng.integers(len(eligible)))]
    primary_items = [PrimaryIndividual(sd) for sd in vertical_results[primary].results]
    n_gaps = len(primary_items) + 1
    placed = []
    for v in eligible:
        if v == primary:
            continue
        slot = int(rng.integers(n_gaps))
        placed.append((slot, VERTICAL_ORDER[v], v))
    placed.sort()
    items: list = []
    gap_blocks: dict[int, list[Vertical]] = {}
    for slot, _, v in placed:
        gap_blocks.setdefault(slot, []).append(v)
    for gap in range(n_gaps):
        for v in gap_blocks.get(gap, []):
            results = vertical_results[v]
            items.append(
                SecondaryBlock(
                    vertical=v,
                    docs=results.results[:k_block],
                    block_score=block_score(results, block_top_m),
                )
            )
        if gap < len(primary_items):
            items.append(primary_items[gap])
    serp_id = f"rand-{member.member_id}-{zlib.crc32(query.encode()):08x}-{rng_seed}"
    return Serp(
        serp_id=serp_id,
        query=query,
        member_id=member.member_id,
        primary_vertical=primary,
        items=tuple(items),
        randomized=True,
    )


def _vectorize(
    examples: list[TrainingExample], vocabulary: list[str]
) -> tuple[np.ndarray, np.ndarray]:
    idx = {f: i for i, f in enumerate(vocabulary)}
    X = np.zeros((len(examples), len(vocabulary)))
    y = np.zeros(len(examples))
    for r, ex in enumerate(examples):
        y[r] = 1.0 if ex.label is Label.Positive else 0.0
        for f, v in ex.features.items():
            j = idx.get(f)
            if j is not None:
                X[r, j] = v
    return X, y


def loss_and_gradient(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, float]:
    """Mean negative log-likelihood + (lambda/2)||w||^2; intercept unregularized."""
    with np.errstate(over="ignore", invalid="ignore"):
        z = X @ w + b
        # log(1 + exp(z)) - y*z, computed stably
        nll = np.mean(np.logaddexp(0.0, z) - y * z)
        loss = float(nll + 0.5 * l2_lambda * float(w @ w))
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
        grad_w = X.T @ (p - y) / len(y) + l2_lambda * w
        grad_b = float(np.mean(p - y))
    return loss, grad_w, grad_b

CONVERGENCE_TOL = 1e-6


def train_logreg(
    examples: list[TrainingExample],
    hyperparams: Hyperparams = Hyperparams(),
    vocabulary: list[str] | None = None,
) -> ScorerModel:
    """Mini-batch gradient descent on the regularized log-loss.

    Deterministic for a fixed seed; stops early once the full-set mean
    loss improves by less than 1e-6 over an epoch.
    """
    labels = {ex.label for ex in examples}
    if len(labels) < 2:
        raise DegenerateLabels("label")
    if vocabulary is None:
        vocabulary = sorted({f for ex in examples for f in ex.features})
    X, y = _vectorize(examples, vocabulary)
    n = len(examples)
    w = np.zeros(len(vocabulary))
    b = 0.0
    rng = np.random.default_rng(hyperparams.seed)
    prev_loss = loss_and_gradient(w, b, X, y, hyperparams.l2_lambda)[0]
    for _ in range(hyperparams.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hyperparams.batch_size):
            batch = order[start : start + hyperparams.batch_size]
            _, gw, gb = loss_and_gradient(
                w, b, X[batch], y[batch], hyperparams.l2_lambda
            )
            w -= hyperparams.learning_rate * gw
            b -= hyperparams.learning_rate * gb
        loss = loss_and_gradient(w, b, X, y, hyperparams.l2_lambda)[0]
        if not math.isfinite(loss) or not np.all(np.isfinite(w)):
            raise NonFiniteLoss(f"loss diverged: {loss}")
        if 0 <= prev_loss - loss < CONVERGENCE_TOL:
            break
        prev_loss = loss
    weights = {f: float(w[i]) for i, f in enumerate(vocabulary) if w[i] != 0.0}
    return ScorerModel(
        weights=weights,
        intercept=float(b),
        vocabulary_hash=vocabulary_hash(vocabulary),
        hyperparams=hyperparams,
    )


def score(model: ScorerModel, features: FeatureVector) -> float:
    z = model.intercept
    for f, v in features.items():
        z += model.weights.get(f, 0.0) * v
    return sigmoid(z)


def save_model(model: ScorerModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f, ensure_ascii=False, sort_keys=True, indent=1)


def load_model(path: str | Path) -> ScorerModel:
    with open(path, "r", encoding="utf-8") as f:
        return ScorerModel.from_dict(json.load(f))
