"""Runtime decision layer: vertical selection, aggregation, baseline.

One scorer serves both phases: secondary-vertical candidates are scored
as blocks for preliminary selection, then compete with the primary
vertical's individual results in the aggregation merge.
"""
from __future__ import annotations

import zlib
from typing import Callable

from .domain import (
    Member,
    PrimaryIndividual,
    RankedItem,
    ResultCategory,
    ResultType,
    ScoredDoc,
    SecondaryBlock,
    Serp,
    VERTICAL_ORDER,
    Vertical,
    category_of,
)
from .errors import EmptyPrimary, NoEligibleVertical
from .features import KeywordIntentTable, assemble
from .scorer import ScorerModel, score
from .vertical_engine import (
    DEFAULT_BLOCK_TOP_M,
    DEFAULT_K_BLOCK,
    VerticalIndex,
    VerticalResultList,
    block_score,
    search,
)

ItemScorer = Callable[[RankedItem], float]


def make_block(
    results: VerticalResultList,
    block_top_m: int = DEFAULT_BLOCK_TOP_M,
    k_block: int = DEFAULT_K_BLOCK,
) -> SecondaryBlock:
    return SecondaryBlock(
        vertical=results.vertical,
        docs=results.results[:k_block],
        block_score=block_score(results, block_top_m),
    )


def select_verticals(
    vertical_results: dict[Vertical, VerticalResultList],
    item_scorer: ItemScorer,
    block_top_m: int = DEFAULT_BLOCK_TOP_M,
    k_block: int = DEFAULT_K_BLOCK,
) -> tuple[Vertical, list[SecondaryBlock]]:
    """Score every non-empty vertical as a block; argmax becomes primary.

    The rest become candidate secondary blocks ordered by descending
    score. Ties fall back to the fixed vertical declaration order.
    """
    scored: list[tuple[float, int, SecondaryBlock]] = []
    for v in sorted(vertical_results, key=lambda v: VERTICAL_ORDER[v]):
        results = vertical_results[v]
        if not results.results:
            continue
        block = make_block(results, block_top_m, k_block)
        scored.append((item_scorer(block), VERTICAL_ORDER[v], block))
    if not scored:
        raise NoEligibleVertical("every vertical returned zero results")
    scored.sort(key=lambda t: (-t[0], t[1]))
    primary = scored[0][2].vertical
    candidates = [b for _, _, b in scored[1:]]
    return primary, candidates


def aggregate(
    primary_results: list[ScoredDoc],
    candidates: list[SecondaryBlock],
    item_scorer: ItemScorer,
) -> list[RankedItem]:
    """Two-pointer merge of the primary ranking with candidate blocks.

    At each output slot the next primary result competes with the best
    remaining block; the primary result wins only on a strictly higher
    score. Primary order is preserved, every primary result is emitted,
    and blocks still unplaced when the primary runs out are dropped.
    """
    if not primary_results:
        raise EmptyPrimary("primary vertical has no results")
    primary_items = [PrimaryIndividual(sd) for sd in primary_results]
    p_scores = [item_scorer(it) for it in primary_items]
    blocks = sorted(
        candidates, key=lambda b: (-item_scorer(b), VERTICAL_ORDER[b.vertical])
    )
    b_scores = [item_scorer(b) for b in blocks]
    out: list[RankedItem] = []
    i = j = 0
    while i < len(primary_items):
        if j >= len(blocks) or p_scores[i] > b_scores[j]:
            out.append(primary_items[i])
            i += 1
        else:
            out.append(blocks[j])
            j += 1
    return out


def baseline_score(
    query: str, item: RankedItem, table: KeywordIntentTable
) -> float:
    """Rule-based control scorer: keyword intent times saturated base score.

    Uses only query-level and base-ranker signals, no searcher intent;
    stands in for a legacy hand-tuned rule stack. Always in [0, 1].
    """
    kwint = table.lookup(query, category_of(item))
    base = (
        item.scored.base_score
        if isinstance(item, PrimaryIndividual)
        else item.block_score
    )
    return kwint * base / (1.0 + base)


def make_model_scorer(
    query: str, member: Member, model: ScorerModel, table: KeywordIntentTable
) -> ItemScorer:
    def scorer(item: RankedItem) -> float:
        return score(model, assemble(query, member.active_intents, item, table))

    return scorer


def make_baseline_scorer(query: str, table: KeywordIntentTable) -> ItemScorer:
    def scorer(item: RankedItem) -> float:
        return baseline_score(query, item, table)

    return scorer


def blend(
    query: str,
    member: Member,
    vertical_results: dict[Vertical, VerticalResultList],
    item_scorer: ItemScorer,
    serp_id: str,
    block_top_m: int = DEFAULT_BLOCK_TOP_M,
    k_block: int = DEFAULT_K_BLOCK,
) -> Serp:
    """Selection plus aggregation over already-fetched vertical results."""
    primary, candidates = select_verticals(
        vertical_results, item_scorer, block_top_m, k_block
    )
    items = aggregate(
        list(vertical_results[primary].results), candidates, item_scorer
    )
    return Serp(
        serp_id=serp_id,
        query=query,
        member_id=member.member_id,
        primary_vertical=primary,
        items=tuple(items),
        randomized=False,
    )


def federated_search(
    query: str,
    member: Member,
    indexes: dict[Vertical, VerticalIndex],
    model: ScorerModel,
    table: KeywordIntentTable,
    k: int = 10,
    block_top_m: int = DEFAULT_BLOCK_TOP_M,
    k_block: int = DEFAULT_K_BLOCK,
    serp_id: str | None = None,
) -> Serp:
    """Fan out to every vertical, select, score, and aggregate."""
    vertical_results = {v: search(idx, query, k) for v, idx in indexes.items()}
    if serp_id is None:
        serp_id = f"fed-{member.member_id}-{zlib.crc32(query.encode()):08x}"
    return blend(
        query,
        member,
        vertical_results,
        make_model_scorer(query, member, model, table),
        serp_id,
        block_top_m,
        k_block,
    )
