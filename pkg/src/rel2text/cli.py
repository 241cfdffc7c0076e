"""Command-line entry point wiring the pipeline modules together.

Exit codes: 0 success, 1 pipeline failure (machine-readable JSON on stderr),
2 usage error. Every file-producing command writes a manifest with content
hashes next to its outputs; all randomness is keyed on --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import ingest, metrics, service, splits, transforms, verbalize
from .data import (
    Dataset,
    dataset_stats,
    load_dataset,
    load_examples,
    load_triples,
    save_examples,
    save_triples,
    with_split_tag,
)
from .errors import LengthMismatch, MissingDescription, ToolkitError
from .manifest import write_manifest

DEFAULT_PORT = 8040


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _parse_source(name: str) -> ingest.KG:
    for source in ingest.KG:
        if source.value.lower() == name.lower():
            return source
    raise ToolkitError(f"unknown KG source {name!r}")


# ---------------------------------------------------------------------------
# Subcommand handlers

def cmd_ingest(args) -> int:
    source = _parse_source(args.source)
    config = ingest.EndpointConfig(
        url=args.endpoint, fixture_path=args.fixture, rate_per_sec=args.rate
    )
    triples = ingest.ingest(source, config, triples_per_relation=args.limit)
    save_triples(triples, args.out)
    inputs = {"fixture": args.fixture} if args.fixture else {}
    write_manifest(
        str(args.out) + ".manifest.json",
        "ingest",
        {"source": source.value, "limit": args.limit, "endpoint": args.endpoint},
        inputs,
        {"triples": args.out},
    )
    print(f"wrote {len(triples)} triples to {args.out}")
    return 0


def cmd_filter(args) -> int:
    triples = load_triples(args.triples)
    kept = []
    verdicts = []
    for triple in triples:
        verdict = ingest.filter_relation(triple.relation)
        if verdict.kept:
            verdict = ingest.filter_triple(triple)
        verdicts.append(
            {
                "triple_id": triple.triple_id,
                "kept": verdict.kept,
                "reason": verdict.reason.value,
            }
        )
        if verdict.kept:
            kept.append(triple)
    save_triples(kept, args.out)
    if args.verdicts:
        Path(args.verdicts).write_text(
            "\n".join(json.dumps(v, ensure_ascii=False) for v in verdicts) + "\n",
            encoding="utf-8",
        )
    write_manifest(
        str(args.out) + ".manifest.json",
        "filter",
        {"kept": len(kept), "dropped": len(triples) - len(kept)},
        {"triples": args.triples},
        {"kept": args.out},
    )
    print(f"kept {len(kept)} of {len(triples)} triples")
    return 0


def cmd_stats(args) -> int:
    if args.multi_response:
        dataset = Dataset(examples=tuple(load_examples(args.data)), path=args.data)
    else:
        dataset = load_dataset(args.data)
    report = dataset_stats(dataset)
    text = json.dumps(report, ensure_ascii=False, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_split(args) -> int:
    dataset = load_dataset(args.data)
    embeddings = splits.load_embeddings(args.embeddings) if args.embeddings else None
    reference_lists = {}
    for spec_item in args.reference or []:
        name, _, path = spec_item.partition("=")
        if not path:
            raise ToolkitError(f"--reference expects name=path, got {spec_item!r}")
        reference_lists[name] = [
            line.strip() for line in _read_lines(path) if line.strip()
        ]
    excluded = splits.exclusion_set(
        dataset.relation_labels(), reference_lists, embeddings, args.threshold
    )
    result = splits.build_splits(
        dataset,
        excluded,
        test_fraction=args.test_fraction,
        val_fraction_of_rest=args.val_fraction,
        seed=args.seed,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_id = dataset.by_id()
    outputs = {}
    for split in (result.train, result.val, result.test):
        examples = [
            with_split_tag(by_id[example_id], split.name)
            for example_id in split.example_ids
        ]
        path = out_dir / f"{split.name}.jsonl"
        save_examples(examples, path)
        outputs[split.name] = path
    (out_dir / "split_manifest.json").write_text(
        json.dumps(result.manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    inputs = {"data": args.data}
    if args.embeddings:
        inputs["embeddings"] = args.embeddings
    write_manifest(
        out_dir / "manifest.json",
        "split",
        {
            "seed": args.seed,
            "test_fraction": args.test_fraction,
            "val_fraction": args.val_fraction,
            "threshold": args.threshold,
        },
        inputs,
        outputs,
    )
    if result.warning:
        print("warning: insufficient eligible relations for the requested test fraction")
    counts = result.manifest["counts"]
    print(f"train {counts['train']} / val {counts['val']} / test {counts['test']}")
    return 0


def cmd_fewshot(args) -> int:
    dataset = load_dataset(args.data)
    train_ids = [example.example_id for example in load_examples(args.train)]
    sizes = [int(part) for part in args.sizes.split(",") if part]
    fewshot = splits.build_fewshot(dataset, train_ids, sizes, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_id = dataset.by_id()
    outputs = {}
    for size, split in sorted(fewshot.items()):
        examples = [
            with_split_tag(by_id[example_id], split.name)
            for example_id in split.example_ids
        ]
        path = out_dir / f"{split.name}.jsonl"
        save_examples(examples, path)
        outputs[split.name] = path
    write_manifest(
        out_dir / "fewshot_manifest.json",
        "fewshot",
        {"seed": args.seed, "sizes": sizes},
        {"data": args.data, "train": args.train},
        outputs,
    )
    print(f"wrote {len(fewshot)} few-shot splits to {out_dir}")
    return 0


def cmd_transform(args) -> int:
    examples = load_examples(args.data)
    variant = transforms.Variant(args.variant)
    lines = []
    refs = []
    for example in examples:
        description = example.triple.relation.description
        if variant in transforms.DESC_VARIANTS and description is None:
            raise MissingDescription(
                f"relation {example.triple.relation.label!r} has no description"
            )
        lines.append(transforms.linearize(example.triple, variant, description).text)
        refs.append(example.reference.text)
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    outputs = {"inputs": args.out}
    if args.refs_out:
        Path(args.refs_out).write_text("\n".join(refs) + "\n", encoding="utf-8")
        outputs["references"] = args.refs_out
    write_manifest(
        str(args.out) + ".manifest.json",
        "transform",
        {"variant": variant.value},
        {"data": args.data},
        outputs,
    )
    print(f"wrote {len(lines)} {variant.value} inputs to {args.out}")
    return 0


def cmd_verbalize(args) -> int:
    examples = load_examples(args.data)
    if args.system == "copy":
        outputs = [
            verbalize.copy_verbalize(example.triple, split_relation=not args.raw_label)
            for example in examples
        ]
    elif args.system == "template":
        table = verbalize.load_template_table(args.templates) if args.templates else {}
        outputs = [
            verbalize.template_verbalize(example.triple, table) for example in examples
        ]
    else:
        if not args.endpoint:
            raise ToolkitError("remote system needs --endpoint")
        inputs = [
            transforms.linearize(example.triple, transforms.Variant.PLAIN)
            for example in examples
        ]
        outputs = verbalize.remote_verbalize(inputs, args.endpoint)
    Path(args.out).write_text("\n".join(outputs) + "\n", encoding="utf-8")
    write_manifest(
        str(args.out) + ".manifest.json",
        "verbalize",
        {"system": args.system, "raw_label": args.raw_label},
        {"data": args.data},
        {"outputs": args.out},
    )
    print(f"wrote {len(outputs)} outputs to {args.out}")
    return 0


def cmd_eval(args) -> int:
    outputs = _read_lines(args.outputs)
    references = _read_lines(args.refs)
    if len(outputs) != len(references):
        raise LengthMismatch(
            f"{len(outputs)} outputs vs {len(references)} references"
        )
    report = metrics.evaluate(
        outputs,
        references,
        scorer_endpoint=args.scorer,
        alpha=args.meteor_alpha,
        beta=args.meteor_beta,
        gamma=args.meteor_gamma,
    )
    out_path = Path(args.out) if args.out else Path(args.outputs).parent / "report.json"
    text = json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n"
    out_path.write_text(text, encoding="utf-8")
    write_manifest(
        str(out_path) + ".manifest.json",
        "eval",
        {"scorer": args.scorer},
        {"outputs": args.outputs, "references": args.refs},
        {"report": out_path},
    )
    sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    pool = service.load_pool(args.pool)
    store = service.AnnotationStore(
        pool, log_path=args.log, session_size=args.session_size
    )
    app = service.create_app(store)
    port = args.port or int(os.environ.get("R2T_ANNOTATION_PORT", DEFAULT_PORT))
    uvicorn.run(app, host=args.host, port=port)
    return 0


def cmd_export(args) -> int:
    pool = service.load_pool(args.pool)
    store = service.AnnotationStore(pool, log_path=args.log)
    examples = store.export_examples()
    save_examples(examples, args.out)
    print(f"exported {len(examples)} records to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rel2text",
        description="Knowledge-graph-to-text dataset engineering and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="fetch relations and triples from a KG")
    p.add_argument("--source", required=True, help="Wikidata, DBPedia, or YAGO")
    p.add_argument("--fixture", help="local dump in the dataset JSONL schema")
    p.add_argument("--endpoint", help="SPARQL endpoint URL override")
    p.add_argument("--limit", type=int, default=5, help="triples per relation")
    p.add_argument("--rate", type=float, default=2.0, help="max requests per second")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter", help="apply relation and entity filters to triples")
    p.add_argument("--triples", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verdicts", help="write per-triple verdicts JSONL here")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("stats", help="dataset counts and delexicalizability")
    p.add_argument("--data", required=True)
    p.add_argument("--multi-response", action="store_true",
                   help="allow multiple records per triple")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="build leakage-aware train/val/test splits")
    p.add_argument("--data", required=True)
    p.add_argument("--embeddings", help="JSONL label/vector table")
    p.add_argument("--reference", action="append",
                   help="name=path of a reference relation list (repeatable)")
    p.add_argument("--test-fraction", type=float, default=0.15)
    p.add_argument("--val-fraction", type=float, default=0.10)
    p.add_argument("--threshold", type=float, default=splits.SIMILARITY_THRESHOLD)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("fewshot", help="nested few-shot splits from a train split")
    p.add_argument("--data", required=True)
    p.add_argument("--train", required=True, help="train split JSONL")
    p.add_argument("--sizes", default="25,50,100,200")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_fewshot)

    p = sub.add_parser("transform", help="linearize triples for a sequence model")
    p.add_argument("--data", required=True)
    p.add_argument(
        "--variant",
        default="plain",
        choices=[v.value for v in transforms.Variant],
    )
    p.add_argument("--out", required=True)
    p.add_argument("--refs-out", help="write aligned reference texts here")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verbalize", help="produce sentences from triples")
    p.add_argument("--data", required=True)
    p.add_argument("--system", required=True, choices=["copy", "template", "remote"])
    p.add_argument("--templates", help="JSON template table (template system)")
    p.add_argument("--endpoint", help="generation endpoint (remote system)")
    p.add_argument("--raw-label", action="store_true",
                   help="copy system: keep the raw relation label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_verbalize)

    p = sub.add_parser("eval", help="score outputs against references")
    p.add_argument("--outputs", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--scorer", help="external scorer endpoint (optional)")
    p.add_argument("--meteor-alpha", type=float, default=metrics.METEOR_ALPHA)
    p.add_argument("--meteor-beta", type=float, default=metrics.METEOR_BETA)
    p.add_argument("--meteor-gamma", type=float, default=metrics.METEOR_GAMMA)
    p.add_argument("--out", help="report path (default report.json next to outputs)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the annotation-collection service")
    p.add_argument("--pool", required=True, help="triples JSONL to annotate")
    p.add_argument("--log", help="append-only event log path")
    p.add_argument("--session-size", type=int, default=service.SESSION_SIZE)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int,
                   help="default: R2T_ANNOTATION_PORT or 8040")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="compact an event log to dataset JSONL")
    p.add_argument("--pool", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ToolkitError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
