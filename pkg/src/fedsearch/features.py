"""Feature construction for the federated scorer.

Three families with disjoint id spaces, all keyed by result category:

  intent:<Intent>:<Vertical>:<ResultType>  binary composite searcher-intent
  kwint:<Vertical>:<ResultType>            p(result category | query)
  base:<Vertical>:<ResultType>             first-pass relevance / block score

plus a constant `bias`. Feature vectors are sparse dicts that never store
zero values.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .domain import (
    ALL_CATEGORIES,
    DEFAULT_INTENTS,
    ClickKind,
    ClickLogEntry,
    Intent,
    PrimaryIndividual,
    RankedItem,
    ResultCategory,
    category_of,
)

FeatureVector = dict[str, float]

BIAS_FEATURE = "bias"

DEFAULT_LAPLACE_ALPHA = 1.0
DEFAULT_MIN_IMPRESSIONS = 20

_WS = re.compile(r"\s+")


def normalize_query(query: str) -> str:
    return _WS.sub(" ", query.strip().lower())


def intent_feature_id(intent: Intent, category: ResultCategory) -> str:
    return f"intent:{intent}:{category.key()}"


def kwint_feature_id(category: ResultCategory) -> str:
    return f"kwint:{category.key()}"


def base_feature_id(category: ResultCategory) -> str:
    return f"base:{category.key()}"


def build_vocabulary(intents: tuple[Intent, ...] = DEFAULT_INTENTS) -> list[str]:
    """The closed, lexicographically sorted feature-id set (71 ids by default)."""
    ids = [BIAS_FEATURE]
    for c in ALL_CATEGORIES:
        ids.append(kwint_feature_id(c))
        ids.append(base_feature_id(c))
        for i in intents:
            ids.append(intent_feature_id(i, c))
    return sorted(ids)


def composite_intent_features(
    active_intents: frozenset[Intent] | set[Intent], category: ResultCategory
) -> FeatureVector:
    return {intent_feature_id(i, category): 1.0 for i in active_intents}


@dataclass(frozen=True)
class KeywordIntentTable:
    """p(result category | query) mined offline from click logs."""

    per_query: dict[str, dict[ResultCategory, float]]
    global_prior: dict[ResultCategory, float]
    min_impressions: int = DEFAULT_MIN_IMPRESSIONS
    laplace_alpha: float = DEFAULT_LAPLACE_ALPHA

    def lookup(self, query: str, category: ResultCategory) -> float:
        row = self.per_query.get(normalize_query(query))
        if row is not None:
            return row.get(category, 0.0)
        return self.global_prior.get(category, 0.0)

    def to_dict(self) -> dict:
        return {
            "per_query": {
                q: {c.key(): p for c, p in sorted(row.items())}
                for q, row in sorted(self.per_query.items())
            },
            "global_prior": {c.key(): p for c, p in sorted(self.global_prior.items())},
            "min_impressions": self.min_impressions,
            "laplace_alpha": self.laplace_alpha,
        }

    @staticmethod
    def from_dict(d: dict) -> "KeywordIntentTable":
        return KeywordIntentTable(
            per_query={
                q: {ResultCategory.from_key(k): float(p) for k, p in row.items()}
                for q, row in d["per_query"].items()
            },
            global_prior={
                ResultCategory.from_key(k): float(p) for k, p in d["global_prior"].items()
            },
            min_impressions=int(d["min_impressions"]),
            laplace_alpha=float(d["laplace_alpha"]),
        )


def _smoothed(clicks: float, impressions: float, alpha: float) -> float:
    denom = impressions + 2 * alpha
    if denom == 0:
        return 0.0
    return (clicks + alpha) / denom


def mine_keyword_intent(
    logs: list[ClickLogEntry],
    alpha: float = DEFAULT_LAPLACE_ALPHA,
    min_impressions: int = DEFAULT_MIN_IMPRESSIONS,
) -> KeywordIntentTable:
    """Estimate p(category | query) = (clicks + a) / (impressions + 2a).

    An impression is one SERP item of that category shown for the query; a
    click is any ResultClick or HeaderClick on such an item. Queries with
    fewer than min_impressions total impressions are dropped from the
    per-query table and served by the pooled global prior instead.
    """
    imp: dict[str, dict[ResultCategory, int]] = {}
    clk: dict[str, dict[ResultCategory, int]] = {}
    pooled_imp: dict[ResultCategory, int] = {c: 0 for c in ALL_CATEGORIES}
    pooled_clk: dict[ResultCategory, int] = {c: 0 for c in ALL_CATEGORIES}
    for entry in logs:
        q = normalize_query(entry.serp.query)
        qi = imp.setdefault(q, {})
        qc = clk.setdefault(q, {})
        for item in entry.serp.items:
            c = category_of(item)
            qi[c] = qi.get(c, 0) + 1
            pooled_imp[c] += 1
        for click in entry.clicks:
            c = category_of(entry.serp.items[click.position])
            qc[c] = qc.get(c, 0) + 1
            pooled_clk[c] += 1
    per_query = {}
    for q, qi in imp.items():
        if sum(qi.values()) < min_impressions:
            continue
        per_query[q] = {
            c: _smoothed(clk[q].get(c, 0), n, alpha) for c, n in qi.items()
        }
    global_prior = {
        c: _smoothed(pooled_clk[c], pooled_imp[c], alpha) for c in ALL_CATEGORIES
    }
    return KeywordIntentTable(per_query, global_prior, min_impressions, alpha)


def keyword_intent_features(
    query: str, category: ResultCategory, table: KeywordIntentTable
) -> FeatureVector:
    p = table.lookup(query, category)
    if p == 0.0:
        return {}
    return {kwint_feature_id(category): p}


def base_ranking_features(item: RankedItem) -> FeatureVector:
    value = item.scored.base_score if isinstance(item, PrimaryIndividual) else item.block_score
    if value == 0.0:
        return {}
    return {base_feature_id(category_of(item)): value}


def assemble(
    query: str,
    active_intents: frozenset[Intent] | set[Intent],
    item: RankedItem,
    table: KeywordIntentTable,
) -> FeatureVector:
    """Union of the three feature families plus the bias term."""
    category = category_of(item)
    fv: FeatureVector = {BIAS_FEATURE: 1.0}
    fv.update(composite_intent_features(active_intents, category))
    fv.update(keyword_intent_features(query, category, table))
    fv.update(base_ranking_features(item))
    return fv


def save_table(table: KeywordIntentTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(table.to_dict(), f, ensure_ascii=False, sort_keys=True, indent=1)


def load_table(path: str | Path) -> KeywordIntentTable:
    with open(path, "r", encoding="utf-8") as f:
        return KeywordIntentTable.from_dict(json.load(f))
