import pytest

from fedsearch.domain import (
    ClickEvent,
    ClickKind,
    ClickLogEntry,
    Document,
    Member,
    PrimaryIndividual,
    ScoredDoc,
    SecondaryBlock,
    Serp,
    Vertical,
)


def doc(doc_id="d1", vertical=Vertical.Jobs, text="a b", is_name=False) -> Document:
    return Document(doc_id, vertical, tuple(text.split()), is_name)


def sdoc(doc_id="d1", vertical=Vertical.Jobs, score=1.0, text="a b") -> ScoredDoc:
    return ScoredDoc(doc(doc_id, vertical, text), score)


def block(vertical=Vertical.Groups, score=1.0, n_docs=2) -> SecondaryBlock:
    docs = tuple(
        sdoc(f"{vertical.value.lower()}-{i}", vertical, score) for i in range(n_docs)
    )
    return SecondaryBlock(vertical, docs, score)


def member(member_id="m1", title="software engineer", **kw) -> Member:
    defaults = dict(
        is_student=False,
        months_to_graduation=None,
        industry="tech",
        activities=(),
    )
    defaults.update(kw)
    return Member(member_id, title, **defaults)


def serp(items, primary=Vertical.Jobs, query="a", serp_id="s1", randomized=True) -> Serp:
    return Serp(serp_id, query, "m1", primary, tuple(items), randomized)


def click(position, kind=ClickKind.ResultClick) -> ClickEvent:
    return ClickEvent(position, kind)


@pytest.fixture
def jobs_serp_4():
    """4 primary job results, a common labeling fixture."""
    items = [PrimaryIndividual(sdoc(f"j{i}", Vertical.Jobs, 4.0 - i)) for i in range(4)]
    return serp(items)
