"""Core vocabulary types shared by every module.

All types are immutable after construction and carry a canonical JSON
form: enumerations serialize as their exact names ("Jobs", "HeaderClick"),
collections persist as JSON Lines (one object per line, UTF-8, LF).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Union


class Vertical(str, Enum):
    People = "People"
    Jobs = "Jobs"
    Companies = "Companies"
    Universities = "Universities"
    Groups = "Groups"
    Slideshows = "Slideshows"
    Posts = "Posts"


# Fixed declaration order, used for deterministic tie-breaking.
VERTICAL_ORDER: dict[Vertical, int] = {v: i for i, v in enumerate(Vertical)}


class ResultType(str, Enum):
    Individual = "Individual"
    Block = "Block"


# Intents are plain strings so the taxonomy stays config-extensible.
Intent = str

DEFAULT_INTENTS: tuple[Intent, ...] = ("JobSeeking", "Hiring", "ContentConsuming")

DEFAULT_INTENT_THRESHOLD = 0.5


class ActivityKind(str, Enum):
    JobSearch = "JobSearch"
    JobApply = "JobApply"
    ProfileView = "ProfileView"
    ContentView = "ContentView"
    GroupJoin = "GroupJoin"
    PostPublish = "PostPublish"


class ClickKind(str, Enum):
    ResultClick = "ResultClick"
    HeaderClick = "HeaderClick"


@dataclass(frozen=True, order=True)
class ResultCategory:
    """(vertical, result type) pair; the unit all features are keyed by."""

    vertical: Vertical
    result_type: ResultType

    def key(self) -> str:
        return f"{self.vertical.value}:{self.result_type.value}"

    @staticmethod
    def from_key(key: str) -> "ResultCategory":
        v, _, t = key.partition(":")
        return ResultCategory(Vertical(v), ResultType(t))


ALL_CATEGORIES: tuple[ResultCategory, ...] = tuple(
    ResultCategory(v, t) for v in Vertical for t in ResultType
)


@dataclass(frozen=True)
class ActivityEvent:
    kind: ActivityKind
    timestamp: int

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp: {self.timestamp}")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "timestamp": self.timestamp}

    @staticmethod
    def from_dict(d: dict) -> "ActivityEvent":
        return ActivityEvent(ActivityKind(d["kind"]), int(d["timestamp"]))


@dataclass(frozen=True)
class Member:
    member_id: str
    title: str
    is_student: bool
    months_to_graduation: int | None
    industry: str
    activities: tuple[ActivityEvent, ...]
    intent_scores: dict[Intent, float] = field(default_factory=dict)
    active_intents: frozenset[Intent] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        ts = [a.timestamp for a in self.activities]
        if ts != sorted(ts):
            raise ValueError("activities must be sorted by timestamp ascending")
        if self.months_to_graduation is not None and self.months_to_graduation < 0:
            raise ValueError("months_to_graduation must be non-negative")

    def with_intents(
        self, scores: dict[Intent, float], threshold: float = DEFAULT_INTENT_THRESHOLD
    ) -> "Member":
        active = frozenset(i for i, s in scores.items() if s >= threshold)
        return Member(
            self.member_id,
            self.title,
            self.is_student,
            self.months_to_graduation,
            self.industry,
            self.activities,
            dict(scores),
            active,
        )

    def to_dict(self) -> dict:
        return {
            "member_id": self.member_id,
            "title": self.title,
            "is_student": self.is_student,
            "months_to_graduation": self.months_to_graduation,
            "industry": self.industry,
            "activities": [a.to_dict() for a in self.activities],
            "intent_scores": dict(sorted(self.intent_scores.items())),
            "active_intents": sorted(self.active_intents),
        }

    @staticmethod
    def from_dict(d: dict) -> "Member":
        return Member(
            member_id=d["member_id"],
            title=d["title"],
            is_student=d["is_student"],
            months_to_graduation=d["months_to_graduation"],
            industry=d["industry"],
            activities=tuple(ActivityEvent.from_dict(a) for a in d["activities"]),
            intent_scores={k: float(v) for k, v in d["intent_scores"].items()},
            active_intents=frozenset(d["active_intents"]),
        )


@dataclass(frozen=True)
class Document:
    doc_id: str
    vertical: Vertical
    text: tuple[str, ...]
    is_name_doc: bool = False

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"document {self.doc_id} has empty text")

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "vertical": self.vertical.value,
            "text": list(self.text),
            "is_name_doc": self.is_name_doc,
        }

    @staticmethod
    def from_dict(d: dict) -> "Document":
        return Document(
            d["doc_id"], Vertical(d["vertical"]), tuple(d["text"]), d["is_name_doc"]
        )


@dataclass(frozen=True)
class ScoredDoc:
    doc: Document
    base_score: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.base_score) or self.base_score < 0:
            raise ValueError(f"base_score must be finite and >= 0: {self.base_score}")

    def to_dict(self) -> dict:
        return {"doc": self.doc.to_dict(), "base_score": self.base_score}

    @staticmethod
    def from_dict(d: dict) -> "ScoredDoc":
        return ScoredDoc(Document.from_dict(d["doc"]), float(d["base_score"]))


@dataclass(frozen=True)
class PrimaryIndividual:
    scored: ScoredDoc

    def to_dict(self) -> dict:
        return {"kind": "PrimaryIndividual", "scored": self.scored.to_dict()}


@dataclass(frozen=True)
class SecondaryBlock:
    vertical: Vertical
    docs: tuple[ScoredDoc, ...]
    block_score: float

    def __post_init__(self) -> None:
        if not self.docs:
            raise ValueError("a secondary block must contain at least one doc")

    def to_dict(self) -> dict:
        return {
            "kind": "SecondaryBlock",
            "vertical": self.vertical.value,
            "docs": [d.to_dict() for d in self.docs],
            "block_score": self.block_score,
        }


RankedItem = Union[PrimaryIndividual, SecondaryBlock]


def ranked_item_from_dict(d: dict) -> RankedItem:
    kind = d["kind"]
    if kind == "PrimaryIndividual":
        return PrimaryIndividual(ScoredDoc.from_dict(d["scored"]))
    if kind == "SecondaryBlock":
        return SecondaryBlock(
            Vertical(d["vertical"]),
            tuple(ScoredDoc.from_dict(x) for x in d["docs"]),
            float(d["block_score"]),
        )
    raise ValueError(f"unknown RankedItem kind: {kind!r}")


def category_of(item: RankedItem) -> ResultCategory:
    if isinstance(item, PrimaryIndividual):
        return ResultCategory(item.scored.doc.vertical, ResultType.Individual)
    return ResultCategory(item.vertical, ResultType.Block)


@dataclass(frozen=True)
class Serp:
    serp_id: str
    query: str
    member_id: str
    primary_vertical: Vertical
    items: tuple[RankedItem, ...]
    randomized: bool

    def __post_init__(self) -> None:
        seen = set()
        for item in self.items:
            if isinstance(item, SecondaryBlock):
                if item.vertical in seen:
                    raise ValueError(f"duplicate block vertical {item.vertical}")
                if item.vertical == self.primary_vertical:
                    raise ValueError("block vertical equals primary vertical")
                seen.add(item.vertical)

    def primary_subsequence(self) -> list[ScoredDoc]:
        return [i.scored for i in self.items if isinstance(i, PrimaryIndividual)]

    def to_dict(self) -> dict:
        return {
            "serp_id": self.serp_id,
            "query": self.query,
            "member_id": self.member_id,
            "primary_vertical": self.primary_vertical.value,
            "items": [i.to_dict() for i in self.items],
            "randomized": self.randomized,
        }

    @staticmethod
    def from_dict(d: dict) -> "Serp":
        return Serp(
            serp_id=d["serp_id"],
            query=d["query"],
            member_id=d["member_id"],
            primary_vertical=Vertical(d["primary_vertical"]),
            items=tuple(ranked_item_from_dict(i) for i in d["items"]),
            randomized=d["randomized"],
        )


@dataclass(frozen=True)
class ClickEvent:
    position: int
    click_kind: ClickKind
    timestamp: int = 0

    def to_dict(self) -> dict:
        return {
            "position": self.position,
            "click_kind": self.click_kind.value,
            "timestamp": self.timestamp,
        }

    @staticmethod
    def from_dict(d: dict) -> "ClickEvent":
        return ClickEvent(int(d["position"]), ClickKind(d["click_kind"]), int(d["timestamp"]))


@dataclass(frozen=True)
class ClickLogEntry:
    serp: Serp
    clicks: tuple[ClickEvent, ...]

    def __post_init__(self) -> None:
        n = len(self.serp.items)
        for c in self.clicks:
            if not 0 <= c.position < n:
                raise ValueError(f"click position {c.position} out of range 0..{n - 1}")
            if c.click_kind is ClickKind.HeaderClick and not isinstance(
                self.serp.items[c.position], SecondaryBlock
            ):
                raise ValueError("HeaderClick on a non-block item")

    def to_dict(self) -> dict:
        return {"serp": self.serp.to_dict(), "clicks": [c.to_dict() for c in self.clicks]}

    @staticmethod
    def from_dict(d: dict) -> "ClickLogEntry":
        return ClickLogEntry(
            Serp.from_dict(d["serp"]),
            tuple(ClickEvent.from_dict(c) for c in d["clicks"]),
        )


def read_click_log(path: str | Path) -> list[ClickLogEntry]:
    """Load a click log, tolerating a truncated final line.

    The service appends a fresh full entry per click event, so the same
    serp_id can appear multiple times; the last line wins.
    """
    by_serp: dict[str, ClickLogEntry] = {}
    for d in read_jsonl(path, skip_partial=True):
        entry = ClickLogEntry.from_dict(d)
        by_serp[entry.serp.serp_id] = entry
    return list(by_serp.values())


def dumps_canonical(d: dict) -> str:
    """Stable single-line JSON used everywhere we persist artifacts."""
    return json.dumps(d, ensure_ascii=False, separators=(",", ":"), sort_keys=True)


def write_jsonl(path: str | Path, dicts: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for d in dicts:
            f.write(dumps_canonical(d))
            f.write("\n")


def read_jsonl(path: str | Path, skip_partial: bool = False) -> Iterator[dict]:
    """Yield one dict per line; with skip_partial, tolerate a truncated tail."""
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                if skip_partial:
                    continue
                raise
