"""HTTP service: search, click ingestion, intent introspection.

Serving is read-only over the loaded indexes/model/table; the only
mutable state is a bounded impression store (for click attribution) and
the append-only click log. Each accepted click flushes a full updated
ClickLogEntry line, so readers dedup by serp_id (last line wins).
"""
from __future__ import annotations

import json
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .domain import (
    ClickEvent,
    ClickKind,
    ClickLogEntry,
    Member,
    PrimaryIndividual,
    SecondaryBlock,
    Serp,
    Vertical,
    dumps_canonical,
    read_jsonl,
)
from .errors import EmptyQuery, NoEligibleVertical
from .features import KeywordIntentTable, load_table
from .federation import federated_search
from .scorer import ScorerModel, load_model
from .vertical_engine import VerticalIndex, load_index

SCHEMA_VERSION = 1

DEFAULT_IMPRESSION_STORE_SIZE = 10_000


@dataclass(frozen=True)
class ServiceConfig:
    index_dir: str
    model_path: str
    kwint_path: str
    population_path: str
    click_log_path: str
    host: str = "127.0.0.1"
    port: int = 8080
    k: int = 10
    block_score_top_m: int = 3
    k_block: int = 3
    impression_store_size: int = DEFAULT_IMPRESSION_STORE_SIZE

    @staticmethod
    def from_file(path: str | Path) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as f:
            return ServiceConfig(**json.load(f))

    def validate(self) -> None:
        for p in (self.index_dir, self.model_path, self.kwint_path, self.population_path):
            if not Path(p).exists():
                raise FileNotFoundError(p)
        if self.k < 1:
            raise ValueError("k must be >= 1")


class ImpressionStore:
    """Bounded LRU of served SERPs with their accumulated clicks."""

    def __init__(self, max_size: int):
        self.max_size = max_size
        self._lock = threading.Lock()
        self._entries: OrderedDict[str, tuple[Serp, list[ClickEvent]]] = OrderedDict()

    def put(self, serp: Serp) -> None:
        with self._lock:
            self._entries[serp.serp_id] = (serp, [])
            self._entries.move_to_end(serp.serp_id)
            while len(self._entries) > self.max_size:
                self._entries.popitem(last=False)

    def get(self, serp_id: str) -> tuple[Serp, list[ClickEvent]] | None:
        with self._lock:
            return self._entries.get(serp_id)

    def add_click(self, serp_id: str, click: ClickEvent) -> tuple[bool, ClickLogEntry] | None:
        """Returns (is_new, updated entry), or None if the serp is unknown."""
        with self._lock:
            rec = self._entries.get(serp_id)
            if rec is None:
                return None
            serp, clicks = rec
            dup = any(
                c.position == click.position and c.click_kind == click.click_kind
                for c in clicks
            )
            if not dup:
                clicks.append(click)
            return not dup, ClickLogEntry(serp, tuple(clicks))


class ClickLogWriter:
    """Single-writer append-only JSONL log, flushed per event."""

    def __init__(self, path: str | Path):
        self._lock = threading.Lock()
        self._f = open(path, "a", encoding="utf-8")

    def append(self, entry: ClickLogEntry) -> None:
        with self._lock:
            self._f.write(dumps_canonical(entry.to_dict()))
            self._f.write("\n")
            self._f.flush()

    def close(self) -> None:
        with self._lock:
            self._f.close()


def _item_view(position: int, item, k_block: int) -> dict:
    def doc_view(sd):
        return {
            "doc_id": sd.doc.doc_id,
            "title": " ".join(sd.doc.text[:4]),
            "snippet": " ".join(sd.doc.text[:12]),
            "base_score": sd.base_score,
        }

    if isinstance(item, PrimaryIndividual):
        return {
            "position": position,
            "type": "result",
            "vertical": item.scored.doc.vertical.value,
            **doc_view(item.scored),
        }
    return {
        "position": position,
        "type": "block",
        "vertical": item.vertical.value,
        "header": f"see all {item.vertical.value} results",
        "block_score": item.block_score,
        "children": [doc_view(sd) for sd in item.docs[:k_block]],
    }


def create_app(
    indexes: dict[Vertical, VerticalIndex],
    model: ScorerModel,
    table: KeywordIntentTable,
    population: dict[str, Member],
    click_log: ClickLogWriter,
    k: int = 10,
    block_score_top_m: int = 3,
    k_block: int = 3,
    impression_store_size: int = DEFAULT_IMPRESSION_STORE_SIZE,
) -> FastAPI:
    app = FastAPI(title="fedsearch")
    store = ImpressionStore(impression_store_size)
    app.state.impressions = store

    def error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(
            {"schema_version": SCHEMA_VERSION, "error": code, "message": message},
            status_code=status,
        )

    @app.get("/healthz")
    def healthz():
        return {"schema_version": SCHEMA_VERSION, "status": "ok"}

    @app.get("/search")
    def search_endpoint(q: str = "", member: str = ""):
        m = population.get(member)
        if m is None:
            return error(404, "UnknownMember", f"unknown member {member!r}")
        if not q.strip():
            return error(400, "EmptyQuery", "query must be non-empty")
        try:
            serp = federated_search(
                q,
                m,
                indexes,
                model,
                table,
                k=k,
                block_top_m=block_score_top_m,
                k_block=k_block,
                serp_id=f"s-{uuid.uuid4().hex}",
            )
        except NoEligibleVertical:
            return {
                "schema_version": SCHEMA_VERSION,
                "serp_id": None,
                "query": q,
                "member_id": member,
                "primary_vertical": None,
                "no_eligible_vertical": True,
                "items": [],
            }
        store.put(serp)
        click_log.append(ClickLogEntry(serp, ()))
        return {
            "schema_version": SCHEMA_VERSION,
            "serp_id": serp.serp_id,
            "query": q,
            "member_id": member,
            "primary_vertical": serp.primary_vertical.value,
            "no_eligible_vertical": False,
            "items": [
                _item_view(i, item, k_block) for i, item in enumerate(serp.items)
            ],
        }

    @app.post("/click")
    def click_endpoint(body: dict):
        serp_id = body.get("serp_id")
        position = body.get("position")
        kind_raw = body.get("click_kind")
        try:
            kind = ClickKind(kind_raw)
        except ValueError:
            return error(400, "InvalidClickKind", f"unknown click_kind {kind_raw!r}")
        rec = store.get(str(serp_id))
        if rec is None:
            return error(404, "UnknownSerp", f"unknown serp_id {serp_id!r}")
        serp, _ = rec
        if not isinstance(position, int) or not 0 <= position < len(serp.items):
            return error(400, "InvalidPosition", f"position {position!r} out of range")
        if kind is ClickKind.HeaderClick and not isinstance(
            serp.items[position], SecondaryBlock
        ):
            return error(400, "HeaderClickOnIndividual", "header click on a result item")
        result = store.add_click(str(serp_id), ClickEvent(position, kind))
        assert result is not None
        is_new, entry = result
        if is_new:
            click_log.append(entry)
        return {"schema_version": SCHEMA_VERSION, "ok": True, "duplicate": not is_new}

    @app.get("/members/{member_id}/intents")
    def member_intents(member_id: str):
        m = population.get(member_id)
        if m is None:
            return error(404, "UnknownMember", f"unknown member {member_id!r}")
        return {
            "schema_version": SCHEMA_VERSION,
            "member_id": member_id,
            "title": m.title,
            "intent_scores": dict(sorted(m.intent_scores.items())),
            "active_intents": sorted(m.active_intents),
        }

    @app.get("/members")
    def members_list():
        return {
            "schema_version": SCHEMA_VERSION,
            "members": [
                {
                    "member_id": m.member_id,
                    "title": m.title,
                    "active_intents": sorted(m.active_intents),
                }
                for m in population.values()
            ],
        }

    return app


def load_app_from_config(config: ServiceConfig) -> FastAPI:
    config.validate()
    indexes = {}
    for v in Vertical:
        path = Path(config.index_dir) / f"{v.value.lower()}.json"
        if path.exists():
            indexes[v] = load_index(path)
    model = load_model(config.model_path)
    table = load_table(config.kwint_path)
    population = {}
    for d in read_jsonl(config.population_path):
        member_dict = d["member"] if "member" in d else d
        m = Member.from_dict(member_dict)
        population[m.member_id] = m
    writer = ClickLogWriter(config.click_log_path)
    return create_app(
        indexes,
        model,
        table,
        population,
        writer,
        k=config.k,
        block_score_top_m=config.block_score_top_m,
        k_block=config.k_block,
        impression_store_size=config.impression_store_size,
    )
