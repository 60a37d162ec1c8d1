"""``rsphunt`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import Config, load_config
from .errors import ConfigError, RspError
from .lang import tag_language
from .records import CategoryLabel, ContactKind, Engine

log = logging.getLogger("rsphunt")

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2


# -- helpers -------------------------------------------------------------

def _read_lines(path: str | Path, what: str) -> list[str]:
    path = Path(path)
    if not path.exists() or path.is_dir():
        raise FileNotFoundError(f"{what} file not found: {path}")
    return [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip() and not ln.startswith("#")]


def _read_jsonl(path: str | Path, what: str) -> list[dict]:
    return [json.loads(ln) for ln in _read_lines(path, what)]


def _config(args) -> Config:
    cfg = load_config(args.config)
    if args.store:
        cfg.store_path = Path(args.store)
    if getattr(args, "models", None):
        cfg.models_dir = Path(args.models)
    return cfg


def _store(cfg: Config):
    from .store import RecordStore

    return RecordStore(cfg.store_path)


def _bundle(cfg: Config):
    from .models import ModelBundle

    if not (cfg.models_dir / "binary.json").is_file():
        raise FileNotFoundError(f"no trained models in {cfg.models_dir} (run `rsphunt train --task desk` first)")
    return ModelBundle.load(cfg.models_dir)


def _adapters(cfg: Config, clock):
    from .hunter.adapters import LiveSearchAdapter, MockSearchEngine

    if not cfg.adapters:
        raise ConfigError("no [[adapters]] configured")
    out = []
    for a in cfg.adapters:
        if a.kind == "mock":
            if a.corpus is None:
                raise ConfigError(f"mock adapter {a.id!r} needs a corpus path")
            if not a.corpus.is_file():
                raise FileNotFoundError(f"adapter corpus file not found: {a.corpus}")
            out.append(MockSearchEngine.from_jsonl(
                a.corpus, adapter_id=a.id, engine=Engine(a.engine),
                supports_site_filter=a.supports_site_filter,
                max_results_per_query=a.max_results_per_query, clock=clock,
            ))
        elif a.kind == "live":
            out.append(LiveSearchAdapter(Engine(a.engine), enabled=a.enabled,
                                         max_results_per_query=a.max_results_per_query))
        else:
            raise ConfigError(f"unknown adapter kind {a.kind!r}")
    return out


def _backend(cfg: Config, vantage: str):
    from .infiltrate.fetch import HttpBackend, MockBackend, Scenario

    if cfg.fetch_backend == "http":
        return HttpBackend(proxy_url=cfg.proxies.get(vantage), vantage=vantage)
    if cfg.scenario is None:
        raise ConfigError("the mock fetch backend needs [fetch] scenario")
    return MockBackend(Scenario.load(cfg.scenario), vantage)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------

def cmd_hunt(args) -> int:
    from .hunter.loop import HuntState, SnowballLimits, snowball_run
    from .hunter.ratelimit import RateGovernor

    cfg = _config(args)
    keywords = _read_lines(args.seeds_keywords, "seed keywords") if args.seeds_keywords else []
    urs = _read_lines(args.seeds_urs, "seed URS") if args.seeds_urs else []
    state = None
    if args.state and Path(args.state).is_file() and args.resume:
        state = HuntState.from_json(json.loads(Path(args.state).read_text(encoding="utf-8")))
    if state is None and not keywords and not urs:
        raise ConfigError("hunt needs --seeds-keywords and/or --seeds-urs")
    clock = cfg.clock()
    adapters = _adapters(cfg, clock)
    governors = {a.id: RateGovernor(cfg.rate_limit, clock) for a in adapters}
    limits = SnowballLimits(
        max_rounds=args.max_rounds if args.max_rounds is not None else cfg.max_rounds,
        max_queries=cfg.max_queries,
    )
    state, summaries = snowball_run(keywords, urs, adapters, _bundle(cfg), _store(cfg), limits,
                                    governors=governors, clock=clock, state=state)
    for s in summaries:
        print(json.dumps(s.to_json(), ensure_ascii=False, sort_keys=True))
    if args.state:
        Path(args.state).write_text(json.dumps(state.to_json(), ensure_ascii=False, sort_keys=True), encoding="utf-8")
    log.info("hunt finished after %d rounds: %d IPTs known", len(summaries), len(state.known_ipt_ids))
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = _config(args)
    bundle = _bundle(cfg)
    if args.input:
        texts = _read_lines(args.input, "input")
        flags = bundle.is_ipt(texts)
        labels = bundle.multilabel.predict(texts) if texts else []
        lines = [
            json.dumps({"text": t, "is_ipt": f, "labels": sorted(x.value for x in ls), "language": tag_language(t)},
                       ensure_ascii=False)
            for t, f, ls in zip(texts, flags, labels)
        ]
        _emit("".join(ln + "\n" for ln in lines), args.output)
        return EXIT_OK
    store = _store(cfg)
    records = list(store.query("ipt"))
    labels = bundle.multilabel.predict([r.text for r in records]) if records else []
    for record, cats in zip(records, labels):
        store.append(replace(record, categories=frozenset(cats), language=tag_language(record.text)))
    log.info("classified %d IPTs", len(records))
    return EXIT_OK


def cmd_extract_contacts(args) -> int:
    from .extract.contacts import extract_contacts

    cfg = _config(args)
    bundle = _bundle(cfg)
    out_lines = []
    if args.input:
        for text in _read_lines(args.input, "input"):
            for c in extract_contacts(text, bundle):
                out_lines.append(json.dumps(c.to_json(), ensure_ascii=False, sort_keys=True))
    else:
        store = _store(cfg)
        for record in list(store.query("ipt")):
            contacts = extract_contacts(record, bundle)
            for c in contacts:
                store.append(c)
                out_lines.append(json.dumps(c.to_json(), ensure_ascii=False, sort_keys=True))
            if contacts:
                store.append(replace(record, contacts=tuple(contacts)))
    _emit("".join(ln + "\n" for ln in out_lines), args.output)
    log.info("extracted %d contacts", len(out_lines))
    return EXIT_OK


def _store_contacts(store, kind: ContactKind) -> list[str]:
    seen: list[str] = []
    for c in store.query("contact", lambda c: c.contact_kind == kind):
        if c.value not in seen:
            seen.append(c.value)
    return seen


def cmd_infiltrate(args) -> int:
    from .infiltrate.sites import DEFAULT_BLOCK_PATTERNS, detect_iframe_cloaking, snapshot_site

    cfg = _config(args)
    store = _store(cfg)
    clock = cfg.clock()
    websites = _read_lines(args.websites, "websites") if args.websites else _store_contacts(store, ContactKind.WEBSITE)
    patterns = cfg.block_patterns or DEFAULT_BLOCK_PATTERNS
    bundle = _bundle(cfg) if args.cloaking else None
    for vantage in args.vantage or cfg.vantages:
        backend = _backend(cfg, vantage)
        for site in websites:
            snap = snapshot_site(site, backend, vantage, taken_at=clock.now(), block_patterns=patterns)
            store.append(snap)
            row = {"website": site, "vantage": vantage, "landing": snap.landing_fqdn,
                   "hops": len(snap.chain.hops), "fqdns": snap.chain.distinct_fqdn_count,
                   "blocked": snap.blocked, "unreachable": snap.unreachable}
            if bundle is not None:
                finding = detect_iframe_cloaking(snap, backend, bundle)
                row["cloaking"] = finding.iframe_url if finding else None
            print(json.dumps(row, ensure_ascii=False, sort_keys=True))
    return EXIT_OK


def cmd_tg_fetch(args) -> int:
    from .infiltrate.telegram import FileFixtureTransport, tg_fetch

    cfg = _config(args)
    if cfg.telegram_fixtures is None:
        raise ConfigError("tg-fetch needs [telegram] fixtures")
    store = _store(cfg)
    handles = _read_lines(args.handles, "handles") if args.handles else _store_contacts(store, ContactKind.TELEGRAM)
    epoch = args.epoch if args.epoch is not None else cfg.telegram_epoch
    transport = FileFixtureTransport(cfg.telegram_fixtures, epoch=epoch)
    clock = cfg.clock()
    for handle in handles:
        try:
            profile, new = tg_fetch(handle, transport, store, clock=clock)
        except RspError as exc:
            log.warning("tg-fetch %s failed: %s", handle, exc)
            continue
        print(json.dumps({"handle": profile.handle, "kind": profile.account_kind.value, "new_messages": len(new)},
                         sort_keys=True))
    return EXIT_OK


def _binary_target(labels) -> int:
    return int(any(lab not in ("Benign", "benign", "0") for lab in labels))


def _task_rows(rows: list[dict], task: str):
    if task == "binary":
        return [(r["text"], _binary_target(r.get("labels", []))) for r in rows]
    if task == "segment":
        return [(r["text"], int("contact" in r.get("labels", []))) for r in rows]
    if task == "contact_type":
        return [(r["text"], ContactKind(r["labels"][0]).value) for r in rows]
    if task == "multilabel":
        return [(r["text"], frozenset(CategoryLabel(x) for x in r["labels"])) for r in rows]
    raise ValueError(task)


def cmd_train(args) -> int:
    from .learn.multilabel import MultiLabelIptClassifier
    from .models import train_binary, train_contact_type, train_desk_bundle, train_segment

    cfg = _config(args)
    seed = args.seed if args.seed is not None else cfg.seed
    if args.task == "desk":
        out = Path(args.out) if args.out else cfg.models_dir
        train_desk_bundle(seed=seed).save(out)
        log.info("desk models written to %s", out)
        return EXIT_OK
    if not args.data or not args.out:
        raise ConfigError("train needs --data and --out unless --task desk")
    rows = _task_rows(_read_jsonl(args.data, "training data"), args.task)
    if args.task == "multilabel":
        model = MultiLabelIptClassifier(random_state=seed).fit([t for t, _ in rows], [s for _, s in rows])
    else:
        trainer = {"binary": train_binary, "segment": train_segment, "contact_type": train_contact_type}[args.task]
        model = trainer(rows, seed=seed)
    Path(args.out).write_text(json.dumps(model.to_dict(), sort_keys=True), encoding="utf-8")
    log.info("%s model trained on %d rows -> %s", args.task, len(rows), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    from .learn.metrics import binary_precision_recall, evaluate
    from .learn.multilabel import MultiLabelIptClassifier
    from .learn.text_models import TextTreeClassifier

    data = json.loads(Path(args.model).read_text(encoding="utf-8"))
    rows = _task_rows(_read_jsonl(args.data, "evaluation data"), args.task)
    if args.task == "multilabel":
        report = evaluate(MultiLabelIptClassifier.from_dict(data), rows).to_json()
    else:
        model = TextTreeClassifier.from_dict(data)
        y = [label for _, label in rows]
        pred = list(model.predict([t for t, _ in rows]))
        if args.task == "contact_type":
            acc = sum(p == t for p, t in zip(pred, y)) / len(y)
            report = {"n_samples": len(y), "accuracy": acc}
        else:
            p, r, f = binary_precision_recall(y, pred)
            report = {"n_samples": len(y), "precision": p, "recall": r, "f1": f}
    print(json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_report(args) -> int:
    from .report import build_report

    cfg = _config(args)
    text = build_report(_store(cfg), args.kind, args.format, ranking=args.ranking, n=args.top)
    _emit(text, args.output)
    return EXIT_OK


def cmd_probe_exposure(args) -> int:
    from .hunter.loop import exposure_probe
    from .tables import ReportTable

    cfg = _config(args)
    adapters = _adapters(cfg, cfg.clock())
    adapter = next((a for a in adapters if a.id == args.adapter), None) if args.adapter else adapters[0]
    if adapter is None:
        raise ConfigError(f"no adapter with id {args.adapter!r}")
    errors: list[str] = []
    rows = exposure_probe(_read_lines(args.keywords, "keywords"), adapter, sorted(args.k), _bundle(cfg), errors)
    table = ReportTable("IPT exposure in top search results", ["k", "% poisoned queries", "IPTs"],
                        [list(r) for r in rows], provenance=f"adapter {adapter.id}")
    sys.stdout.write(table.render(args.format))
    for e in errors:
        log.warning("probe skipped %s", e)
    return EXIT_OK


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--store", help="record store directory (overrides the config)")
    common.add_argument("--models", help="trained model directory (overrides the config)")
    common.add_argument("--format", choices=("text", "csv"), default="text")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="rsphunt", description="Hunt and analyze reflected search poisoning.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("hunt", parents=[common], help="snowball IPT discovery over search adapters")
    p.add_argument("--seeds-keywords")
    p.add_argument("--seeds-urs")
    p.add_argument("--state", help="file to save (and with --resume, load) the hunt state")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--max-rounds", type=int)
    p.set_defaults(func=cmd_hunt)

    p = sub.add_parser("classify", parents=[common], help="categorize stored IPTs (or texts from --input)")
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("extract-contacts", parents=[common], help="extract contacts from stored IPTs")
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_extract_contacts)

    p = sub.add_parser("infiltrate", parents=[common], help="snapshot IPT websites from each vantage")
    p.add_argument("--websites")
    p.add_argument("--vantage", action="append")
    p.add_argument("--cloaking", action="store_true", help="also check iframe cloaking")
    p.set_defaults(func=cmd_infiltrate)

    p = sub.add_parser("tg-fetch", parents=[common], help="fetch Telegram profiles and messages")
    p.add_argument("--handles")
    p.add_argument("--epoch", type=int)
    p.set_defaults(func=cmd_tg_fetch)

    p = sub.add_parser("train", parents=[common], help="train a model")
    p.add_argument("--task", choices=("desk", "binary", "segment", "contact_type", "multilabel"), required=True)
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate a model on labeled JSON lines")
    p.add_argument("--task", choices=("binary", "segment", "contact_type", "multilabel"), required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", parents=[common], help="print a measurement report")
    p.add_argument("--kind", required=True,
                   choices=("categories", "languages", "contacts", "top-abused", "popularity", "redirects", "clusters"))
    p.add_argument("--ranking", help="popularity ranking file, one apex domain per line")
    p.add_argument("--top", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("probe-exposure", parents=[common], help="measure IPT presence in top-k results")
    p.add_argument("--keywords", required=True)
    p.add_argument("--k", type=int, nargs="+", default=[10, 20, 50, 100])
    p.add_argument("--adapter")
    p.set_defaults(func=cmd_probe_exposure)
    return parser


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (RspError, OSError, ValueError) as exc:
        print(f"rsphunt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
