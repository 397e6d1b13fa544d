import random

import pytest

from fedsearch.domain import (
    ALL_CATEGORIES,
    PrimaryIndividual,
    ResultCategory,
    ResultType,
    SecondaryBlock,
    Vertical,
    category_of,
)
from fedsearch.errors import EmptyPrimary, NoEligibleVertical
from fedsearch.features import KeywordIntentTable
from fedsearch.federation import (
    aggregate,
    baseline_score,
    blend,
    federated_search,
    make_model_scorer,
    select_verticals,
)
from fedsearch.scorer import Hyperparams, ScorerModel, vocabulary_hash
from fedsearch.vertical_engine import VerticalResultList, build_index
from conftest import block, doc, member, sdoc


def _primaries(scores):
    return [sdoc(f"p{i}", Vertical.Jobs, abs(s) + 0.001) for i, s in enumerate(scores)]


def _scorer_from(p_scores, block_scores):
    """Score items by identity: doc_id for primaries, vertical for blocks."""
    table = {}
    for i, s in enumerate(p_scores):
        table[f"p{i}"] = s

    def item_scorer(item):
        if isinstance(item, PrimaryIndividual):
            return table[item.scored.doc.doc_id]
        return block_scores[item.vertical]

    return item_scorer


def test_aggregate_block_in_middle():
    p = _primaries([0.9, 0.8, 0.2])
    blocks = [block(Vertical.Groups)]
    out = aggregate(p, blocks, _scorer_from([0.9, 0.8, 0.2], {Vertical.Groups: 0.5}))
    kinds = [
        i.scored.doc.doc_id if isinstance(i, PrimaryIndividual) else i.vertical
        for i in out
    ]
    assert kinds == ["p0", "p1", Vertical.Groups, "p2"]


def test_aggregate_low_block_dropped():
    p = _primaries([0.9, 0.8])
    out = aggregate(p, [block(Vertical.Groups)],
                    _scorer_from([0.9, 0.8], {Vertical.Groups: 0.1}))
    assert all(isinstance(i, PrimaryIndividual) for i in out)
    assert len(out) == 2


def test_aggregate_block_beats_first_primary():
    p = _primaries([0.5])
    out = aggregate(p, [block(Vertical.Groups)],
                    _scorer_from([0.5], {Vertical.Groups: 0.9}))
    assert isinstance(out[0], SecondaryBlock)
    assert isinstance(out[1], PrimaryIndividual)


def test_aggregate_tie_places_block():
    # Algorithm: primary wins only on a strictly greater score
    p = _primaries([0.5])
    out = aggregate(p, [block(Vertical.Groups)],
                    _scorer_from([0.5], {Vertical.Groups: 0.5}))
    assert isinstance(out[0], SecondaryBlock)


def test_aggregate_empty_primary():
    with pytest.raises(EmptyPrimary):
        aggregate([], [block(Vertical.Groups)], lambda i: 0.5)


def reference_merge(p_scores, block_scores):
    """Literal transcription of the merge rule, kept independent of aggregate()."""
    remaining = [("P", i, s) for i, s in enumerate(p_scores)]
    blocks = sorted(
        (("B", v, s) for v, s in block_scores.items()), key=lambda t: -t[2]
    )
    out = []
    while remaining:
        if blocks and blocks[0][2] >= remaining[0][2]:
            out.append(blocks.pop(0)[:2])
        else:
            out.append(remaining.pop(0)[:2])
    return out


def _run_instance(rng):
    n_p = rng.randint(1, 10)
    n_c = rng.randint(0, 6)
    scores = rng.sample(range(10_000), n_p + n_c)
    p_scores = [s / 10_000 for s in scores[:n_p]]
    c_verticals = [v for v in Vertical if v is not Vertical.Jobs][:n_c]
    block_scores = {v: s / 10_000 for v, s in zip(c_verticals, scores[n_p:])}
    p = _primaries(p_scores)
    blocks = [block(v) for v in c_verticals]
    out = aggregate(p, blocks, _scorer_from(p_scores, block_scores))
    got = [
        ("P", int(i.scored.doc.doc_id[1:])) if isinstance(i, PrimaryIndividual)
        else ("B", i.vertical)
        for i in out
    ]
    return got, reference_merge(p_scores, block_scores), p_scores, block_scores


def test_aggregate_matches_reference_on_random_instances():
    rng = random.Random(2024)
    for _ in range(1000):
        got, want, _, _ = _run_instance(rng)
        assert got == want


def test_aggregate_output_structure_properties():
    rng = random.Random(77)
    for _ in range(200):
        got, _, p_scores, block_scores = _run_instance(rng)
        primaries = [g for g in got if g[0] == "P"]
        assert primaries == [("P", i) for i in range(len(p_scores))]
        assert len(got) <= len(p_scores) + len(block_scores)
        # every emitted block outscores the primary emitted right after it
        for a, b in zip(got, got[1:]):
            if a[0] == "B" and b[0] == "P":
                assert block_scores[a[1]] > p_scores[b[1]]


def test_aggregate_all_blocks_below_all_primaries_drop():
    rng = random.Random(5)
    for _ in range(200):
        n_p, n_c = rng.randint(1, 8), rng.randint(1, 6)
        p_scores = [rng.uniform(0.5, 1.0) for _ in range(n_p)]
        c_verticals = [v for v in Vertical if v is not Vertical.Jobs][:n_c]
        block_scores = {v: rng.uniform(0.0, 0.4) for v in c_verticals}
        out = aggregate(
            _primaries(p_scores), [block(v) for v in c_verticals],
            _scorer_from(p_scores, block_scores),
        )
        assert all(isinstance(i, PrimaryIndividual) for i in out)


# --- vertical selection -------------------------------------------------

def _vrl(vertical, scores):
    return VerticalResultList(
        vertical,
        tuple(sdoc(f"{vertical.value}-{i}", vertical, s) for i, s in enumerate(scores)),
    )


def _block_scorer(by_vertical):
    def item_scorer(item):
        return by_vertical[item.vertical]

    return item_scorer


def test_select_verticals_argmax_and_order():
    results = {
        Vertical.Jobs: _vrl(Vertical.Jobs, [1.0]),
        Vertical.People: _vrl(Vertical.People, [1.0]),
        Vertical.Groups: _vrl(Vertical.Groups, [1.0]),
    }
    primary, candidates = select_verticals(
        results,
        _block_scorer({Vertical.Jobs: 0.8, Vertical.People: 0.6, Vertical.Groups: 0.3}),
    )
    assert primary is Vertical.Jobs
    assert [c.vertical for c in candidates] == [Vertical.People, Vertical.Groups]


def test_select_verticals_singleton():
    results = {Vertical.Posts: _vrl(Vertical.Posts, [1.0])}
    primary, candidates = select_verticals(results, _block_scorer({Vertical.Posts: 0.2}))
    assert primary is Vertical.Posts
    assert candidates == []


def test_select_verticals_tie_declaration_order():
    results = {
        Vertical.Jobs: _vrl(Vertical.Jobs, [1.0]),
        Vertical.People: _vrl(Vertical.People, [1.0]),
    }
    primary, _ = select_verticals(
        results, _block_scorer({Vertical.Jobs: 0.5, Vertical.People: 0.5})
    )
    assert primary is Vertical.People


def test_select_verticals_no_eligible():
    with pytest.raises(NoEligibleVertical):
        select_verticals({Vertical.Jobs: _vrl(Vertical.Jobs, [])}, lambda i: 0.0)


# --- baseline -----------------------------------------------------------

ZERO_TABLE = KeywordIntentTable({}, {c: 0.0 for c in ALL_CATEGORIES})


def _table(value):
    return KeywordIntentTable({}, {c: value for c in ALL_CATEGORIES})


def test_baseline_zero_kwint_zero_score():
    item = PrimaryIndividual(sdoc("j1", Vertical.Jobs, 100.0))
    assert baseline_score("q", item, ZERO_TABLE) == 0.0


def test_baseline_monotone_in_base():
    t = _table(0.4)
    low = baseline_score("q", PrimaryIndividual(sdoc("j1", Vertical.Jobs, 1.0)), t)
    high = baseline_score("q", PrimaryIndividual(sdoc("j2", Vertical.Jobs, 3.0)), t)
    assert high > low


def test_baseline_saturates_at_kwint():
    t = _table(0.4)
    huge = baseline_score("q", PrimaryIndividual(sdoc("j1", Vertical.Jobs, 1e9)), t)
    assert huge == pytest.approx(0.4, rel=1e-6)
    assert 0.0 <= huge <= 1.0


# --- end-to-end federated_search ---------------------------------------

def _tiny_indexes():
    return {
        Vertical.Jobs: build_index(
            [doc("j1", Vertical.Jobs, "python job"), doc("j2", Vertical.Jobs, "python role job")],
            Vertical.Jobs,
        ),
        Vertical.People: build_index(
            [doc("p1", Vertical.People, "python engineer")], Vertical.People
        ),
        Vertical.Groups: build_index(
            [doc("g1", Vertical.Groups, "cooking club")], Vertical.Groups
        ),
    }


def _uniform_model(extra=None):
    weights = dict(extra or {})
    return ScorerModel(weights, 0.0, vocabulary_hash(sorted(weights)), Hyperparams())


def test_federated_search_single_matching_vertical():
    indexes = {
        Vertical.Jobs: build_index([doc("j1", Vertical.Jobs, "python job")], Vertical.Jobs),
        Vertical.Groups: build_index([doc("g1", Vertical.Groups, "cooking club")], Vertical.Groups),
    }
    s = federated_search("python", member(), indexes, _uniform_model(), _table(0.1), k=5)
    assert s.primary_vertical is Vertical.Jobs
    assert all(isinstance(i, PrimaryIndividual) for i in s.items)
    assert not s.randomized


def test_federated_search_no_eligible():
    indexes = _tiny_indexes()
    with pytest.raises(NoEligibleVertical):
        federated_search("zzz", member(), indexes, _uniform_model(), _table(0.1))


def test_federated_search_deterministic():
    indexes = _tiny_indexes()
    m = member(active_intents=frozenset({"JobSeeking"}))
    model = _uniform_model({"intent:JobSeeking:Jobs:Block": 2.0, "base:Jobs:Individual": 0.1})
    a = federated_search("python", m, indexes, model, _table(0.1), serp_id="x")
    b = federated_search("python", m, indexes, model, _table(0.1), serp_id="x")
    assert a == b


def test_federated_search_intent_changes_blending():
    indexes = _tiny_indexes()
    # one model; intent composite features carry the personalization
    model = _uniform_model(
        {
            "intent:JobSeeking:Jobs:Block": 3.0,
            "intent:JobSeeking:Jobs:Individual": 3.0,
            "intent:Hiring:People:Block": 3.0,
            "intent:Hiring:People:Individual": 3.0,
        }
    )
    seeker = member("ms", active_intents=frozenset({"JobSeeking"}))
    hirer = member("mh", active_intents=frozenset({"Hiring"}))
    s1 = federated_search("python", seeker, indexes, model, _table(0.1))
    s2 = federated_search("python", hirer, indexes, model, _table(0.1))
    assert s1.primary_vertical is Vertical.Jobs
    assert s2.primary_vertical is Vertical.People
    subseq = s1.primary_subsequence()
    assert [sd.doc.doc_id for sd in subseq] == ["j1", "j2"]  # base order kept
