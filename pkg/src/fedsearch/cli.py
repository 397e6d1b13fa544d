"""Umbrella CLI: genworld, index, intents, collect, mine-kwint, train, ab, serve."""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from .domain import (
    DEFAULT_INTENTS,
    Document,
    Member,
    Vertical,
    read_click_log,
    read_jsonl,
    write_jsonl,
)
from .errors import FedSearchError
from .features import build_vocabulary, load_table, mine_keyword_intent, save_table
from .federation import blend, make_baseline_scorer, make_model_scorer
from .intent import (
    batch_update,
    load_intent_model,
    save_intent_model,
    train_intent_model,
)
from .scorer import Hyperparams, build_training_set, load_model, save_model, train_logreg
from .simulation import (
    ClickModelParams,
    LatentMember,
    World,
    collect_randomized,
    generate_world,
    load_world,
    run_ab,
    save_world,
)
from .vertical_engine import build_index, load_index, save_index, search


def _load_corpus_dir(corpus_dir: Path) -> dict[Vertical, list[Document]]:
    corpora = {}
    for v in Vertical:
        path = corpus_dir / f"{v.value.lower()}.jsonl"
        if path.exists():
            corpora[v] = [Document.from_dict(d) for d in read_jsonl(path)]
    if not corpora:
        raise FedSearchError(f"no <vertical>.jsonl corpus files in {corpus_dir}")
    return corpora


def _build_indexes(corpora: dict[Vertical, list[Document]]):
    return {v: build_index(docs, v) for v, docs in corpora.items()}


def _world_indexes(world: World):
    return _build_indexes(
        {v: [Document.from_dict(d) for d in docs] for v, docs in world.corpora.items()}
    )


def _load_indexes(index_dir: Path):
    indexes = {}
    for v in Vertical:
        path = index_dir / f"{v.value.lower()}.json"
        if path.exists():
            indexes[v] = load_index(path)
    if not indexes:
        raise FedSearchError(f"no index files in {index_dir}")
    return indexes


def _members_by_id(world: World) -> dict[str, Member]:
    return {lm.member.member_id: lm.member for lm in world.population}


def cmd_genworld(args) -> int:
    world = generate_world(args.members, args.docs, args.queries, args.seed)
    # close the loop once at generation time: fit the intent model on the
    # generator's ground truth, then persist members with inferred intents
    labeled = [(lm.member, lm.true_intents) for lm in world.population]
    intent_model = train_intent_model(labeled, now=world.now)
    updated = batch_update([lm.member for lm in world.population], intent_model, world.now)
    population = [
        LatentMember(m, lm.true_intents) for m, lm in zip(updated, world.population)
    ]
    world = World(population, world.corpora, world.queries, world.now)
    out = Path(args.out)
    save_world(world, out)
    save_intent_model(intent_model, out / "intent_model.json")
    print(f"world: {len(world.population)} members, "
          f"{sum(len(c) for c in world.corpora.values())} docs, "
          f"{len(world.queries)} queries -> {out}")
    return 0


def cmd_index(args) -> int:
    corpora = _load_corpus_dir(Path(args.corpus))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for v, docs in corpora.items():
        index = build_index(docs, v)
        save_index(index, out / f"{v.value.lower()}.json")
        print(f"indexed {v.value}: {index.doc_count} docs")
    return 0


def cmd_intents(args) -> int:
    model = load_intent_model(args.model)
    rows = list(read_jsonl(args.population))
    latent = "member" in rows[0] if rows else False
    members = [
        Member.from_dict(r["member"] if latent else r) for r in rows
    ]
    updated = batch_update(members, model, args.now)
    if latent:
        out_rows = [
            {"member": m.to_dict(), "true_intents": r["true_intents"]}
            for m, r in zip(updated, rows)
        ]
    else:
        out_rows = [m.to_dict() for m in updated]
    write_jsonl(args.out, out_rows)
    print(f"updated intents for {len(updated)} members -> {args.out}")
    return 0


def cmd_collect(args) -> int:
    world = load_world(args.world)
    indexes = _load_indexes(Path(args.index)) if args.index else _world_indexes(world)
    logs = collect_randomized(world, indexes, args.n, args.seed, k=args.k)
    write_jsonl(args.out, (e.to_dict() for e in logs))
    clicks = sum(len(e.clicks) for e in logs)
    print(f"collected {len(logs)} randomized impressions, {clicks} clicks -> {args.out}")
    return 0


def cmd_mine_kwint(args) -> int:
    logs = read_click_log(args.logs)
    table = mine_keyword_intent(logs, args.alpha, args.min_impressions)
    save_table(table, args.out)
    print(f"mined {len(table.per_query)} head queries from {len(logs)} impressions -> {args.out}")
    return 0


def cmd_train(args) -> int:
    logs = read_click_log(args.logs)
    table = load_table(args.kwint)
    members = _members_by_id(load_world(args.world)) if args.world else {}
    examples = build_training_set(logs, table, members)
    hp = Hyperparams(
        l2_lambda=args.l2,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch,
        seed=args.seed,
    )
    model = train_logreg(examples, hp, build_vocabulary(DEFAULT_INTENTS))
    save_model(model, args.out)
    n_pos = sum(1 for e in examples if e.label.value == "Positive")
    print(f"trained on {len(examples)} examples ({n_pos} positive) -> {args.out}")
    return 0


def _make_policy(spec: str, indexes, table, k: int, fanout_cache, counter):
    model = None if spec == "baseline" else load_model(spec)

    def policy(query: str, member: Member):
        if query not in fanout_cache:
            fanout_cache[query] = {v: search(idx, query, k) for v, idx in indexes.items()}
        if model is None:
            item_scorer = make_baseline_scorer(query, table)
        else:
            item_scorer = make_model_scorer(query, member, model, table)
        return blend(
            query, member, fanout_cache[query], item_scorer, serp_id=f"ab-{next(counter)}"
        )

    return policy


def cmd_ab(args) -> int:
    world = load_world(args.world)
    indexes = _load_indexes(Path(args.index)) if args.index else _world_indexes(world)
    table = load_table(args.kwint)
    cache: dict = {}
    counter = itertools.count()
    control = _make_policy(args.control, indexes, table, args.k, cache, counter)
    treatment = _make_policy(args.treatment, indexes, table, args.k, cache, counter)
    report = run_ab(world, control, treatment, args.searches, args.seed)
    with open(args.report, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=1, sort_keys=True)
    for m in report.metrics():
        z, p = m.z_and_p()
        lift = "undefined" if m.lift is None else f"{m.lift * 100:+.2f}%"
        print(
            f"{m.name}: control {m.control_rate:.4f} treatment {m.treatment_rate:.4f} "
            f"lift {lift} p={p:.3g}"
        )
    print(f"report -> {args.report}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, load_app_from_config

    config = ServiceConfig.from_file(args.config)
    app = load_app_from_config(config)
    if args.static:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=args.static, html=True), name="ui")
    uvicorn.run(app, host=config.host, port=config.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedsearch")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("genworld", help="generate a synthetic world")
    p.add_argument("--members", type=int, default=5000)
    p.add_argument("--docs", type=int, default=2000)
    p.add_argument("--queries", type=int, default=500)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_genworld)

    p = sub.add_parser("index", help="build per-vertical indexes")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("intents", help="apply an intent model to a population")
    p.add_argument("--population", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--now", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_intents)

    p = sub.add_parser("collect", help="generate randomized click logs")
    p.add_argument("--world", required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--n", type=int, default=30000)
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("mine-kwint", help="mine keyword intent table")
    p.add_argument("--logs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--min-impressions", type=int, default=20)
    p.set_defaults(func=cmd_mine_kwint)

    p = sub.add_parser("train", help="train the federated scorer")
    p.add_argument("--logs", required=True)
    p.add_argument("--kwint", required=True)
    p.add_argument("--world", default=None, help="world dir, source of member intents")
    p.add_argument("--out", required=True)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ab", help="run the A/B harness")
    p.add_argument("--world", required=True)
    p.add_argument("--index", default=None)
    p.add_argument("--kwint", required=True)
    p.add_argument("--control", default="baseline", help='"baseline" or a model path')
    p.add_argument("--treatment", required=True, help='"baseline" or a model path')
    p.add_argument("--searches", type=int, default=50000)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_ab)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--static", default=None, help="directory to serve at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (FedSearchError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
