"""Command-line entry point binding the library into runnable workflows:
ingest, segment, split, train, evaluate, tabulate, confusion and serve.

Every artifact-producing run drops a flat key=value config echo next to its
outputs so the run can be reproduced from that file alone.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from trialtables.corpus.annofile import read_annotations, write_annotations
from trialtables.corpus.pubmed import FixtureClient, partition_by_domain
from trialtables.corpus.records import Doc
from trialtables.corpus.segment import StructuredAbstract, select_result_sentences
from trialtables.corpus.splits import (
    domain_holdout,
    split_dataset,
    stratify_fraction,
)
from trialtables.corpus.ingest import ingest_brat_dir
from trialtables.errors import ConfigurationError, ToolkitError
from trialtables.evaluate import (
    confusion_ner,
    confusion_re,
    eval_joint,
    eval_ner,
    eval_re_gold,
    eval_tab_relaxed,
    eval_tab_strict,
)
from trialtables.features import EmbeddingBackend, HashedBackend, load_embeddings
from trialtables.modelio import load_model, save_model
from trialtables.ner.train import train_ner
from trialtables.relex import train_re
from trialtables.tabulate import assemble_table, read_csv_rows, tabulate_batch
from trialtables.training import TrainConfig, write_training_log

_TRAIN_DEFAULTS = TrainConfig()


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def write_config_echo(path: Path, subcommand: str, args, **extras) -> None:
    """Flat key=value record of one run, written next to its outputs."""
    payload = {"subcommand": subcommand}
    for key, value in vars(args).items():
        if key in ("func", "subcommand"):
            continue
        payload[key] = value
    payload.update(extras)
    lines = [f"{key}={_format_value(payload[key])}" for key in sorted(payload)]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_backend(value: str):
    if value == "hashed":
        return HashedBackend()
    if value.startswith("embeddings:"):
        return EmbeddingBackend(load_embeddings(value.split(":", 1)[1]))
    raise ConfigurationError(f"backend must be 'hashed' or 'embeddings:<path>', got {value!r}")


def _parse_mapping(value: str | None) -> dict[str, str] | None:
    if not value:
        return None
    mapping = {}
    for part in value.split(","):
        if "=" not in part:
            raise ConfigurationError(f"mapping entries are SOURCE=TARGET, got {part!r}")
        src, dst = part.split("=", 1)
        mapping[src.strip()] = dst.strip()
    return mapping


def _parse_ratios(value: str) -> tuple[float, float, float]:
    parts = value.split(",")
    if len(parts) != 3:
        raise ConfigurationError(f"ratios need three comma-separated numbers, got {value!r}")
    return tuple(float(p) for p in parts)


def _tables_from_docs(docs) -> dict[str, list]:
    return {
        doc.doc_id: [row.astuple() for row in assemble_table(doc).rows] for doc in docs
    }


def _tables_from_csv_dir(directory: Path) -> dict[str, list]:
    """Tables back from a tabulate output directory, via its manifest."""
    manifest = directory / "manifest.tsv"
    tables: dict[str, list] = {}
    if manifest.exists():
        for line in manifest.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            doc_id, name = line.split("\t")
            _, rows = read_csv_rows((directory / name).read_text(encoding="utf-8"))
            tables[doc_id] = rows
        return tables
    for path in sorted(directory.glob("*.csv")):
        _, rows = read_csv_rows(path.read_text(encoding="utf-8"))
        tables[path.stem] = rows
    return tables


def _load_tables(path: Path) -> dict[str, list]:
    if path.is_dir():
        return _tables_from_csv_dir(path)
    return _tables_from_docs(read_annotations(path))


def _cmd_ingest_brat(args) -> int:
    docs = ingest_brat_dir(
        args.directory,
        mapping=_parse_mapping(args.mapping),
        domain=args.domain,
        results_only=not args.all_sentences,
    )
    out = Path(args.out)
    write_annotations(docs, out)
    write_config_echo(Path(f"{out}.run-config.txt"), "ingest-brat", args, n_docs=len(docs))
    print(f"ingested {len(docs)} sentences -> {out}")
    return 0


def _cmd_ingest_annotations(args) -> int:
    docs = read_annotations(args.input)
    kept = [d for d in docs if d.answer == "accept"] if args.accepted_only else docs
    out = Path(args.out)
    write_annotations(kept, out)
    write_config_echo(
        Path(f"{out}.run-config.txt"), "ingest-annotations", args,
        n_read=len(docs), n_written=len(kept),
    )
    print(f"read {len(docs)}, wrote {len(kept)} -> {out}")
    return 0


def _cmd_partition_domains(args) -> int:
    pmids = [
        line.strip()
        for line in Path(args.pmids).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    client = None
    if args.fixture:
        client = FixtureClient(json.loads(Path(args.fixture).read_text(encoding="utf-8")))
    matches = partition_by_domain(pmids, args.term, client=client, cache_dir=args.cache)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(f"{p}\n" for p in sorted(matches)), encoding="utf-8")
    write_config_echo(
        Path(f"{out}.run-config.txt"), "partition-domains", args,
        n_pmids=len(pmids), n_matches=len(matches),
    )
    print(f"{len(matches)} of {len(pmids)} ids match {args.term!r} -> {out}")
    return 0


def _cmd_segment(args) -> int:
    source = Path(args.input)
    files = sorted(source.glob("*.txt")) if source.is_dir() else [source]
    docs: list[Doc] = []
    for path in files:
        abstract = StructuredAbstract.from_text(
            pmid=path.stem, text=path.read_text(encoding="utf-8"), domain=args.domain
        )
        docs.extend(select_result_sentences(abstract))
    out = Path(args.out)
    write_annotations(docs, out)
    write_config_echo(
        Path(f"{out}.run-config.txt"), "segment", args, n_files=len(files), n_docs=len(docs)
    )
    print(f"segmented {len(files)} abstracts into {len(docs)} result sentences -> {out}")
    return 0


def _cmd_split(args) -> int:
    docs = read_annotations(args.input)
    result = split_dataset(docs, ratios=_parse_ratios(args.ratios), seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result.write_manifest(out_dir / "manifest.tsv")
    for name, docs_part in (
        ("train", result.train), ("dev", result.dev), ("test", result.test),
    ):
        write_annotations(docs_part, out_dir / f"{name}.jsonl")
    sizes = result.sizes
    write_config_echo(
        out_dir / "run-config.txt", "split", args,
        n_docs=len(docs), n_train=sizes[0], n_dev=sizes[1], n_test=sizes[2],
    )
    print(f"split {len(docs)} docs into train={sizes[0]} dev={sizes[1]} test={sizes[2]}")
    return 0


def _select_training_docs(docs, args):
    """Apply the experiment filters in a fixed order: domains, holdout, fraction."""
    selected = list(docs)
    if args.domains:
        wanted = {d.strip() for d in args.domains.split(",")}
        selected = [d for d in selected if d.meta.get("domain", "") in wanted]
    if args.holdout:
        selected = domain_holdout(selected, args.holdout).rest
    if args.fraction is not None:
        selected = stratify_fraction(selected, args.fraction, seed=args.seed)
    return selected


def _cmd_train(args) -> int:
    config = TrainConfig(
        batch_size=args.batch_size,
        dropout=args.dropout,
        learning_rate=args.learning_rate,
        patience_steps=args.patience,
        max_steps=args.max_steps,
        eval_interval=args.eval_interval,
        seed=args.seed,
    )
    backend = _parse_backend(args.backend)
    train_docs = _select_training_docs(read_annotations(args.train), args)
    dev_docs = read_annotations(args.dev) if args.dev else []
    if args.task == "ner":
        model, log = train_ner(train_docs, dev_docs, config=config, backend=backend)
    else:
        model, log = train_re(
            train_docs, dev_docs, config=config, backend=backend, threshold=args.threshold
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    log_path = Path(args.log) if args.log else Path(f"{out}.log.jsonl")
    write_training_log(log, log_path)
    evals = [entry for entry in log if entry.get("loss") is not None]
    best_dev = max(
        (e["dev_f1"] for e in evals if e.get("dev_f1") is not None), default=None
    )
    write_config_echo(
        Path(f"{out}.run-config.txt"), "train", args,
        n_train=len(train_docs), n_dev=len(dev_docs),
        n_evals=len(evals), best_dev_f1=best_dev,
    )
    summary = f"trained {args.task} on {len(train_docs)} docs, {len(evals)} evals"
    if best_dev is not None:
        summary += f", best dev F1 {best_dev:.4f}"
    print(summary + f" -> {out}")
    return 0


def _cmd_evaluate(args) -> int:
    if args.task in ("tab-strict", "tab-relaxed"):
        pred = _load_tables(Path(args.pred))
        gold = _load_tables(Path(args.gold))
        report = (eval_tab_strict if args.task == "tab-strict" else eval_tab_relaxed)(pred, gold)
    else:
        pred = read_annotations(args.pred)
        gold = read_annotations(args.gold)
        evaluator = {"ner": eval_ner, "re-gold": eval_re_gold, "joint": eval_joint}[args.task]
        report = evaluator(pred, gold)
    for line in report.lines():
        print(line)
    if args.out_dir:
        from trialtables.reporting import write_metrics_outputs

        out_dir = Path(args.out_dir)
        write_metrics_outputs(report, out_dir, args.task)
        write_config_echo(out_dir / "run-config.txt", "evaluate", args)
    return 0


def _cmd_tabulate(args) -> int:
    docs = read_annotations(args.input)
    ner_model = re_model = None
    if not args.gold:
        if not args.ner or not args.re:
            raise ConfigurationError("tabulate needs --ner and --re models unless --gold is set")
        ner_model = load_model(args.ner, embeddings=args.embeddings)
        re_model = load_model(args.re, embeddings=args.embeddings)
    out_dir = Path(args.out_dir)
    manifest = tabulate_batch(
        docs,
        out_dir,
        ner_model=ner_model,
        re_model=re_model,
        threshold=args.threshold,
        gold_passthrough=args.gold,
    )
    write_config_echo(out_dir / "run-config.txt", "tabulate", args, n_docs=len(docs))
    print(f"wrote {len(manifest)} tables -> {out_dir}")
    return 0


def _cmd_confusion(args) -> int:
    pred = read_annotations(args.pred)
    gold = read_annotations(args.gold)
    builder = confusion_ner if args.task == "ner" else confusion_re
    matrix = builder(pred, gold, normalize=not args.raw)
    for line in matrix.lines():
        print(line)
    if args.out_dir:
        from trialtables.reporting import write_confusion_outputs

        out_dir = Path(args.out_dir)
        write_confusion_outputs(matrix, out_dir, f"confusion-{args.task}")
        write_config_echo(out_dir / "run-config.txt", "confusion", args)
    return 0


def _cmd_serve(args) -> int:
    from trialtables.service import create_app, serve

    ner_model = load_model(args.ner, embeddings=args.embeddings) if args.ner else None
    re_model = load_model(args.re, embeddings=args.embeddings) if args.re else None
    app = create_app(
        ner_model=ner_model,
        re_model=re_model,
        data_dir=args.data_dir,
        batch_cap=args.batch_cap,
        threshold=args.threshold,
    )
    serve(app, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trialtables",
        description="Extract evidence tables of trial outcomes from result sentences.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest-brat", help="convert standoff-annotated abstracts")
    p.add_argument("directory")
    p.add_argument("--out", required=True)
    p.add_argument("--mapping", help="comma-separated SOURCE=TARGET label pairs")
    p.add_argument("--domain", default="")
    p.add_argument("--all-sentences", action="store_true")
    p.set_defaults(func=_cmd_ingest_brat)

    p = sub.add_parser("ingest-annotations", help="validate and canonicalize a record file")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--accepted-only", action="store_true")
    p.set_defaults(func=_cmd_ingest_annotations)

    p = sub.add_parser("partition-domains", help="match article ids against a domain query")
    p.add_argument("--pmids", required=True)
    p.add_argument("--term", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cache")
    p.add_argument("--fixture", help="JSON file of term -> matching ids")
    p.set_defaults(func=_cmd_partition_domains)

    p = sub.add_parser("segment", help="split abstracts into result sentences")
    p.add_argument("input", help="a .txt file or a directory of them")
    p.add_argument("--out", required=True)
    p.add_argument("--domain", default="")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("split", help="seeded train/dev/test split")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", default="0.7,0.1,0.2")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="fit the tagger or the pair classifier")
    p.add_argument("task", choices=("ner", "re"))
    p.add_argument("--train", required=True)
    p.add_argument("--dev")
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    p.add_argument("--backend", default="hashed", help="hashed | embeddings:<path>")
    p.add_argument("--fraction", type=float)
    p.add_argument("--domains", help="comma-separated domain names to keep")
    p.add_argument("--holdout", help="domain to exclude from training")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=_TRAIN_DEFAULTS.seed)
    p.add_argument("--batch-size", type=int, default=_TRAIN_DEFAULTS.batch_size)
    p.add_argument("--dropout", type=float, default=_TRAIN_DEFAULTS.dropout)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--patience", type=int, default=_TRAIN_DEFAULTS.patience_steps)
    p.add_argument("--max-steps", type=int, default=_TRAIN_DEFAULTS.max_steps)
    p.add_argument("--eval-interval", type=int, default=_TRAIN_DEFAULTS.eval_interval)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--task", required=True,
                   choices=("ner", "re-gold", "joint", "tab-strict", "tab-relaxed"))
    p.add_argument("--pred", required=True,
                   help="annotation file, or a table directory for tab tasks")
    p.add_argument("--gold", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("tabulate", help="run the sentence -> table pipeline")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ner")
    p.add_argument("--re", dest="re")
    p.add_argument("--embeddings")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--gold", action="store_true", help="bypass models, use stored annotations")
    p.set_defaults(func=_cmd_tabulate)

    p = sub.add_parser("confusion", help="token or pair confusion matrix")
    p.add_argument("task", choices=("ner", "re"))
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--raw", action="store_true", help="raw counts instead of row-normalized")
    p.set_defaults(func=_cmd_confusion)

    p = sub.add_parser("serve", help="run the extraction and review service")
    p.add_argument("--ner")
    p.add_argument("--re", dest="re")
    p.add_argument("--embeddings")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--batch-cap", type=int, default=10000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
