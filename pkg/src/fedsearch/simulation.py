"""Synthetic world, cascade click model, and the A/B harness.

Members are generated with latent ground-truth intents that condition
their profiles and activity streams (informative but noisy signals), so
intent recovery is measurable. Clicks follow a cascade model whose click
probability is boosted when an item's category matches the member's true
intent. All randomness is seeded and bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .domain import (
    ActivityEvent,
    ActivityKind,
    ClickEvent,
    ClickKind,
    ClickLogEntry,
    Intent,
    Member,
    PrimaryIndividual,
    ResultCategory,
    SecondaryBlock,
    Serp,
    Vertical,
    category_of,
    read_jsonl,
    write_jsonl,
)

Policy = Callable[[str, Member], Serp]

WORLD_NOW = 1_700_000_000  # fixed "present" epoch for the whole simulation

INTENT_PREFERRED_VERTICALS: dict[Intent, frozenset[Vertical]] = {
    "JobSeeking": frozenset({Vertical.Jobs}),
    "Hiring": frozenset({Vertical.People}),
    "ContentConsuming": frozenset({Vertical.Slideshows, Vertical.Posts, Vertical.Groups}),
}

TOPIC_TERMS = [
    "python", "java", "golang", "rust", "frontend", "backend", "cloud",
    "devops", "security", "analytics", "database", "mobile", "design",
    "leadership", "management", "marketing", "sales", "finance",
    "accounting", "consulting", "strategy", "operations", "logistics",
    "healthcare", "biotech", "robotics", "automation", "blockchain",
    "gaming", "education", "research", "statistics", "economics",
    "photography", "writing", "negotiation", "productivity", "startup",
    "investing", "sustainability",
]

VERTICAL_TERMS: dict[Vertical, list[str]] = {
    Vertical.People: ["engineer", "scientist", "manager", "director", "analyst", "specialist"],
    Vertical.Jobs: ["hiring", "position", "opening", "remote", "salary", "benefits"],
    Vertical.Companies: ["company", "startup", "enterprise", "firm", "agency", "corporation"],
    Vertical.Universities: ["university", "college", "degree", "campus", "faculty", "institute"],
    Vertical.Groups: ["group", "community", "discussion", "network", "forum", "meetup"],
    Vertical.Slideshows: ["slides", "presentation", "deck", "tutorial", "webinar", "talk"],
    Vertical.Posts: ["post", "article", "opinion", "update", "story", "announcement"],
}

FILLER_TERMS = [
    "team", "work", "skills", "experience", "growth", "global", "senior",
    "junior", "lead", "best", "top", "new", "future", "trends", "guide",
    "tips", "review", "intro", "advanced", "course",
]

FIRST_NAMES = ["alice", "bob", "carol", "david", "erin", "frank", "grace", "henry"]
LAST_NAMES = ["smith", "jones", "garcia", "chen", "patel", "kim", "muller", "rossi"]

TITLES_NEUTRAL = [
    "software engineer", "product manager", "data analyst", "accountant",
    "marketing specialist", "sales associate", "operations lead", "designer",
]
TITLES_RECRUITER = [
    "technical recruiter", "senior recruiter", "talent partner",
    "talent acquisition lead", "sourcer", "hiring manager",
]


@dataclass(frozen=True)
class LatentMember:
    member: Member
    true_intents: frozenset[Intent]

    def to_dict(self) -> dict:
        return {"member": self.member.to_dict(), "true_intents": sorted(self.true_intents)}

    @staticmethod
    def from_dict(d: dict) -> "LatentMember":
        return LatentMember(Member.from_dict(d["member"]), frozenset(d["true_intents"]))


@dataclass(frozen=True)
class ClickModelParams:
    examine_continuation: float = 0.7
    base_click_prob: dict[ResultCategory, float] | float = 0.05
    intent_boost: float = 4.0
    header_click_share: float = 0.3

    def click_prob(self, category: ResultCategory, true_intents: frozenset[Intent]) -> float:
        if isinstance(self.base_click_prob, dict):
            p = self.base_click_prob.get(category, 0.0)
        else:
            p = self.base_click_prob
        for intent in true_intents:
            if category.vertical in INTENT_PREFERRED_VERTICALS.get(intent, frozenset()):
                p *= self.intent_boost
                break
        return min(p, 1.0)


@dataclass(frozen=True)
class MetricResult:
    name: str
    control_hits: int
    treatment_hits: int
    control_n: int
    treatment_n: int

    @property
    def control_rate(self) -> float:
        return self.control_hits / self.control_n

    @property
    def treatment_rate(self) -> float:
        return self.treatment_hits / self.treatment_n

    @property
    def lift(self) -> float | None:
        if self.control_rate == 0:
            return None
        return (self.treatment_rate - self.control_rate) / self.control_rate

    @property
    def se_diff(self) -> float:
        v = self.control_rate * (1 - self.control_rate) / self.control_n
        v += self.treatment_rate * (1 - self.treatment_rate) / self.treatment_n
        return math.sqrt(v)

    def z_and_p(self) -> tuple[float, float]:
        """Two-proportion z-test with pooled variance; two-sided p."""
        pooled = (self.control_hits + self.treatment_hits) / (
            self.control_n + self.treatment_n
        )
        se = math.sqrt(
            pooled * (1 - pooled) * (1 / self.control_n + 1 / self.treatment_n)
        )
        if se == 0:
            return 0.0, 1.0
        z = (self.treatment_rate - self.control_rate) / se
        p = math.erfc(abs(z) / math.sqrt(2))
        return z, p

    def to_dict(self) -> dict:
        z, p = self.z_and_p()
        return {
            "name": self.name,
            "control_hits": self.control_hits,
            "treatment_hits": self.treatment_hits,
            "control_n": self.control_n,
            "treatment_n": self.treatment_n,
            "control_rate": self.control_rate,
            "treatment_rate": self.treatment_rate,
            "lift": self.lift,
            "se_diff": self.se_diff,
            "z": z,
            "p_value": p,
        }


@dataclass(frozen=True)
class AbReport:
    primary_ctr: MetricResult
    secondary_ctr: MetricResult
    secondary_switches: MetricResult

    def metrics(self) -> tuple[MetricResult, ...]:
        return (self.primary_ctr, self.secondary_ctr, self.secondary_switches)

    def to_dict(self) -> dict:
        return {m.name: m.to_dict() for m in self.metrics()}


@dataclass(frozen=True)
class World:
    population: list[LatentMember]
    corpora: dict[Vertical, list]
    queries: list[str]
    now: int = WORLD_NOW


def _make_doc_dict(rng: np.random.Generator, vertical: Vertical, i: int) -> dict:
    # People corpus keeps a slice of pure name docs; queries never hit them.
    if vertical is Vertical.People and rng.random() < 0.1:
        text = [
            FIRST_NAMES[int(rng.integers(len(FIRST_NAMES)))],
            LAST_NAMES[int(rng.integers(len(LAST_NAMES)))],
        ]
        return {
            "doc_id": f"{vertical.value.lower()}-{i}",
            "vertical": vertical.value,
            "text": text,
            "is_name_doc": True,
        }
    topic = TOPIC_TERMS[int(rng.integers(len(TOPIC_TERMS)))]
    text = [topic] * int(rng.integers(1, 4))
    if rng.random() < 0.4:
        text.append(TOPIC_TERMS[int(rng.integers(len(TOPIC_TERMS)))])
    vt = VERTICAL_TERMS[vertical]
    text.extend(rng.choice(vt, size=2, replace=False).tolist())
    n_fill = int(rng.integers(4, 10))
    text.extend(rng.choice(FILLER_TERMS, size=n_fill, replace=True).tolist())
    order = rng.permutation(len(text))
    return {
        "doc_id": f"{vertical.value.lower()}-{i}",
        "vertical": vertical.value,
        "text": [text[k] for k in order],
        "is_name_doc": False,
    }


_ACTIVITY_RATES_BASE = {
    ActivityKind.JobSearch: 0.3,
    ActivityKind.JobApply: 0.1,
    ActivityKind.ProfileView: 2.0,
    ActivityKind.ContentView: 2.0,
    ActivityKind.GroupJoin: 0.2,
    ActivityKind.PostPublish: 0.3,
}
_ACTIVITY_RATES_JOBSEEKING = {
    ActivityKind.JobSearch: 6.0,
    ActivityKind.JobApply: 3.0,
}
_ACTIVITY_RATES_CONTENT = {
    ActivityKind.ContentView: 10.0,
    ActivityKind.GroupJoin: 2.0,
    ActivityKind.PostPublish: 2.0,
}
_ACTIVITY_RATES_HIRING = {
    ActivityKind.ProfileView: 8.0,
}


def _sample_member(
    rng: np.random.Generator,
    i: int,
    mixture: dict[Intent, float],
    no_intent_rate: float,
    now: int,
) -> LatentMember:
    intents: set[Intent] = set()
    if rng.random() >= no_intent_rate:
        # rejection-sample a non-empty intent set when any mass exists
        if any(p > 0 for p in mixture.values()):
            while not intents:
                intents = {i_ for i_, p in mixture.items() if rng.random() < p}
    title = TITLES_NEUTRAL[int(rng.integers(len(TITLES_NEUTRAL)))]
    if "Hiring" in intents and rng.random() < 0.8:
        title = TITLES_RECRUITER[int(rng.integers(len(TITLES_RECRUITER)))]
    is_student = False
    months = None
    if "JobSeeking" in intents and rng.random() < 0.3:
        is_student = True
        months = int(rng.integers(0, 12))
    elif rng.random() < 0.05:
        is_student = True
        months = int(rng.integers(13, 48))
    rates = dict(_ACTIVITY_RATES_BASE)
    if "JobSeeking" in intents:
        rates.update(_ACTIVITY_RATES_JOBSEEKING)
    if "ContentConsuming" in intents:
        rates.update(_ACTIVITY_RATES_CONTENT)
    if "Hiring" in intents:
        rates.update(_ACTIVITY_RATES_HIRING)
    window = 28 * 86400
    events = []
    for kind in ActivityKind:
        n = int(rng.poisson(rates[kind]))
        for _ in range(n):
            events.append(ActivityEvent(kind, now - int(rng.integers(0, window))))
        # stale history outside the window, uninformative by construction
        for _ in range(int(rng.poisson(1.0))):
            events.append(
                ActivityEvent(kind, now - window - int(rng.integers(1, 10 * window)))
            )
    events.sort(key=lambda e: e.timestamp)
    member = Member(
        member_id=f"m{i:05d}",
        title=title,
        is_student=is_student,
        months_to_graduation=months,
        industry="",
        activities=tuple(events),
    )
    return LatentMember(member, frozenset(intents))


DEFAULT_INTENT_MIXTURE: dict[Intent, float] = {
    "JobSeeking": 0.3,
    "Hiring": 0.2,
    "ContentConsuming": 0.4,
}
DEFAULT_NO_INTENT_RATE = 0.25


def generate_world(
    n_members: int,
    docs_per_vertical: int,
    n_queries: int,
    seed: int,
    mixture: dict[Intent, float] | None = None,
    no_intent_rate: float = DEFAULT_NO_INTENT_RATE,
    now: int = WORLD_NOW,
) -> World:
    if min(n_members, docs_per_vertical, n_queries) < 1:
        raise ValueError("all sizes must be >= 1")
    if mixture is None:
        mixture = DEFAULT_INTENT_MIXTURE
    rng = np.random.default_rng(seed)
    population = [
        _sample_member(rng, i, mixture, no_intent_rate, now) for i in range(n_members)
    ]
    corpora = {
        v: [_make_doc_dict(rng, v, i) for i in range(docs_per_vertical)]
        for v in Vertical
    }
    queries = []
    for _ in range(n_queries):
        q = TOPIC_TERMS[int(rng.integers(len(TOPIC_TERMS)))]
        if rng.random() < 0.3:
            q += " " + FILLER_TERMS[int(rng.integers(len(FILLER_TERMS)))]
        queries.append(q)
    return World(population, corpora, queries, now)


def simulate_session(
    latent: LatentMember,
    serp: Serp,
    params: ClickModelParams,
    rng: np.random.Generator,
) -> ClickLogEntry:
    """Cascade scan: examine top-down, click probabilistically, continue
    with probability gamma after each examined item."""
    clicks = []
    for pos, item in enumerate(serp.items):
        p = params.click_prob(category_of(item), latent.true_intents)
        if rng.random() < p:
            kind = ClickKind.ResultClick
            if isinstance(item, SecondaryBlock) and rng.random() < params.header_click_share:
                kind = ClickKind.HeaderClick
            clicks.append(ClickEvent(pos, kind, timestamp=pos))
        if rng.random() >= params.examine_continuation:
            break
    return ClickLogEntry(serp, tuple(clicks))


def _arm_counts(logs: list[ClickLogEntry]) -> tuple[int, int, int, int]:
    n = len(logs)
    primary = secondary = switches = 0
    for entry in logs:
        has_p = has_s = has_h = False
        for c in entry.clicks:
            item = entry.serp.items[c.position]
            if c.click_kind is ClickKind.HeaderClick:
                has_h = True
            elif isinstance(item, PrimaryIndividual):
                has_p = True
            else:
                has_s = True
        primary += has_p
        secondary += has_s
        switches += has_h
    return n, primary, secondary, switches


def compute_metrics(
    control_logs: list[ClickLogEntry], treatment_logs: list[ClickLogEntry]
) -> AbReport:
    """Three engagement metrics as per-search proportions.

    A search counts toward a metric when it has at least one qualifying
    click: primary CTR (result clicks on primary items), secondary CTR
    (result clicks inside blocks), secondary switches (header clicks).
    """
    cn, cp, cs, ch = _arm_counts(control_logs)
    tn, tp, ts, th = _arm_counts(treatment_logs)
    if cn == 0 or tn == 0:
        raise ValueError("each arm needs at least one search")
    return AbReport(
        primary_ctr=MetricResult("primary_vertical_ctr", cp, tp, cn, tn),
        secondary_ctr=MetricResult("secondary_vertical_ctr", cs, ts, cn, tn),
        secondary_switches=MetricResult("secondary_vertical_switches", ch, th, cn, tn),
    )


def run_ab(
    world: World,
    control_policy: Policy,
    treatment_policy: Policy,
    n_searches: int,
    seed: int,
    params: ClickModelParams = ClickModelParams(),
) -> AbReport:
    """Split seeded traffic by fair coin, simulate sessions, compare arms.

    Each search draws its rng stream from (seed, index), so results are
    reproducible and order-independent.
    """
    if n_searches < 1:
        raise ValueError("n_searches must be >= 1")
    control_logs: list[ClickLogEntry] = []
    treatment_logs: list[ClickLogEntry] = []
    for i in range(n_searches):
        rng = np.random.default_rng([seed, i])
        latent = world.population[int(rng.integers(len(world.population)))]
        query = world.queries[int(rng.integers(len(world.queries)))]
        treatment_arm = bool(rng.random() < 0.5)
        policy = treatment_policy if treatment_arm else control_policy
        serp = policy(query, latent.member)
        entry = simulate_session(latent, serp, params, rng)
        (treatment_logs if treatment_arm else control_logs).append(entry)
    return compute_metrics(control_logs, treatment_logs)


def collect_randomized(
    world: World,
    indexes,
    n_impressions: int,
    seed: int,
    params: ClickModelParams = ClickModelParams(),
    k: int = 10,
) -> list[ClickLogEntry]:
    """Run the randomization experiment: serve randomized SERPs to the
    simulated population and record their clicks."""
    from .scorer import randomize_serp
    from .vertical_engine import search

    fanout_cache: dict[str, dict] = {}
    logs = []
    for i in range(n_impressions):
        rng = np.random.default_rng([seed, i])
        latent = world.population[int(rng.integers(len(world.population)))]
        query = world.queries[int(rng.integers(len(world.queries)))]
        if query not in fanout_cache:
            fanout_cache[query] = {v: search(idx, query, k) for v, idx in indexes.items()}
        serp = randomize_serp(
            query, latent.member, fanout_cache[query], rng_seed=seed * 1_000_003 + i
        )
        serp = Serp(
            serp_id=f"{serp.serp_id}-{i}",
            query=serp.query,
            member_id=serp.member_id,
            primary_vertical=serp.primary_vertical,
            items=serp.items,
            randomized=True,
        )
        logs.append(simulate_session(latent, serp, params, rng))
    return logs


# --- world persistence -------------------------------------------------

def save_world(world: World, out_dir: str | Path) -> None:
    out = Path(out_dir)
    (out / "corpora").mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "members.jsonl", (lm.to_dict() for lm in world.population))
    for v, docs in world.corpora.items():
        write_jsonl(out / "corpora" / f"{v.value.lower()}.jsonl", docs)
    write_jsonl(out / "queries.jsonl", ({"query": q} for q in world.queries))
    write_jsonl(out / "meta.jsonl", [{"now": world.now}])


def load_world(world_dir: str | Path) -> World:
    d = Path(world_dir)
    population = [LatentMember.from_dict(x) for x in read_jsonl(d / "members.jsonl")]
    corpora = {}
    for v in Vertical:
        path = d / "corpora" / f"{v.value.lower()}.jsonl"
        corpora[v] = list(read_jsonl(path))
    queries = [x["query"] for x in read_jsonl(d / "queries.jsonl")]
    now = next(read_jsonl(d / "meta.jsonl"))["now"]
    return World(population, corpora, queries, now)
