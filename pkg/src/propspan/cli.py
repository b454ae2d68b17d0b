"""Command-line entry point.

Subcommands: validate, stats, score, split-check, train, predict,
report. Exit codes: 0 success, 1 data/validation failure, 2 usage
error. Human-readable numbers follow the 2-decimal percent convention;
JSON output carries raw fractions under stable keys.

The only environment variable consulted is PROPSPAN_THREADS, an upper
bound on corpus-loading worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from . import metrics
from .corpus import (
    CorpusError,
    compare_stats,
    compute_stats,
    load_corpus,
    read_annotation_file,
    read_article_text,
    read_source_labels,
    verify_split,
    write_predictions_tsv,
)
from .embeddings import EmbeddingFormatError
from .metrics import MatchMode, ScoreReport
from .model import AnnotationSet, Document, sentence_label
from .nn import load_checkpoint
from .pipeline import (
    ExperimentConfig,
    build_examples,
    decode_predictions,
    predict_examples,
    provider_for,
    run_experiment,
)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PROPSPAN_THREADS", "1")))
    except ValueError:
        return 1


def _resolve_corpus_dirs(args) -> tuple[Path, Path | None, Path | None]:
    """(articles, annotations, splits) from --corpus or explicit flags."""
    if getattr(args, "corpus", None):
        root = Path(args.corpus)
        articles = root / "articles"
        annotations = root / "annotations"
        splits = root / "splits"
        return (
            articles,
            annotations if annotations.is_dir() else None,
            splits if splits.is_dir() else None,
        )
    articles = Path(args.articles)
    annotations = Path(args.annotations) if getattr(args, "annotations", None) else None
    splits = Path(args.split_dir) if getattr(args, "split_dir", None) else None
    return articles, annotations, splits


def _load_from_args(args):
    articles, annotations, splits = _resolve_corpus_dirs(args)
    return load_corpus(articles, annotations, splits, workers=_workers())


def _percent_line(report: ScoreReport) -> str:
    return (
        f"P {100 * report.precision:.2f} R {100 * report.recall:.2f} "
        f"F1 {100 * report.f1:.2f}"
    )


def _write_json(path: str | None, payload: dict) -> None:
    if path:
        Path(path).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _add_corpus_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", help="corpus root (articles/, annotations/, splits/)")
    parser.add_argument("--articles", help="directory of <doc_id>.txt articles")
    parser.add_argument("--annotations", help="directory of annotation TSV files")
    parser.add_argument("--split-dir", dest="split_dir", help="directory of split id lists")


def _check_corpus_flags(parser: argparse.ArgumentParser, args) -> None:
    if not args.corpus and not args.articles:
        parser.error("either --corpus or --articles is required")


def cmd_validate(args, parser) -> int:
    _check_corpus_flags(parser, args)
    corpus = _load_from_args(args)
    n_fragments = sum(len(a) for a in corpus.gold.values())
    print(f"OK: {len(corpus)} documents, {n_fragments} fragments")
    return 0


def _bundled_expected(name: str) -> dict:
    with resources.files("propspan.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def cmd_stats(args, parser) -> int:
    _check_corpus_flags(parser, args)
    corpus = _load_from_args(args)
    source_labels = None
    if args.source_labels:
        source_labels = read_source_labels(args.source_labels)
    elif args.corpus and (Path(args.corpus) / "source_labels.tsv").exists():
        source_labels = read_source_labels(Path(args.corpus) / "source_labels.tsv")

    stats = compute_stats(corpus, source_labels)
    if args.json:
        _write_json(args.json, stats.as_dict())
    if args.tsv:
        Path(args.tsv).write_text(stats.to_tsv(), encoding="utf-8")

    print(f"articles\t{stats.total_articles}")
    if stats.articles_by_source is not None:
        print(
            f"articles_by_source\tprop {stats.articles_by_source['prop']}"
            f"\tnonprop {stats.articles_by_source['nonprop']}"
        )
    print(f"sentences\t{stats.sentence_count}")
    print(f"sentences_with_blank_lines\t{stats.line_count_with_blank}")
    print(
        "sentences_with_technique\t"
        f"{stats.sentences_with_technique}\t({100 * stats.technique_sentence_fraction:.1f}%)"
    )
    print(f"total_instances\t{stats.total_instances}")
    print(stats.to_tsv(), end="")

    if args.expected:
        expected = (
            _bundled_expected("expected_corpus_stats.json")
            if args.expected == "bundled"
            else json.loads(Path(args.expected).read_text(encoding="utf-8"))
        )
        problems = compare_stats(stats, expected, length_tolerance=args.length_tol)
        for problem in problems:
            print(f"MISMATCH {problem}", file=sys.stderr)
        if problems:
            return 1
        print("expected-stats check: OK")
    return 0


def cmd_split_check(args, parser) -> int:
    _check_corpus_flags(parser, args)
    corpus = _load_from_args(args)
    expected = None
    if args.expected:
        expected = (
            _bundled_expected("expected_split_counts.json")
            if args.expected == "bundled"
            else json.loads(Path(args.expected).read_text(encoding="utf-8"))
        )
    report = verify_split(corpus, expected)
    for name, counts in report.counts.items():
        print(f"{name}\tarticles {counts.articles}\tsentences {counts.sentences}")
    if report.unassigned_articles:
        print(f"unassigned\tarticles {report.unassigned_articles}")
    if args.json:
        _write_json(args.json, report.as_dict())
    for mismatch in report.mismatches:
        print(f"MISMATCH {mismatch}", file=sys.stderr)
    return 0 if report.ok else 1


def _load_predictions(path: Path) -> dict[str, AnnotationSet]:
    grouped = read_annotation_file(path)
    return {
        doc_id: AnnotationSet(doc_id, tuple(frags)) for doc_id, frags in grouped.items()
    }


def _sentence_labels_from_fragments(
    documents: dict[str, Document], annotations: dict[str, AnnotationSet]
) -> list[int]:
    labels = []
    for doc_id in sorted(documents):
        doc = documents[doc_id]
        ann = annotations.get(doc_id, AnnotationSet(doc_id, ()))
        for span in doc.sentences:
            labels.append(int(sentence_label(doc, ann, span.index)))
    return labels


def cmd_score(args, parser) -> int:
    gold_path = Path(args.gold)
    if gold_path.is_dir():
        candidates = (
            gold_path / "annotations" if (gold_path / "annotations").is_dir() else gold_path
        )
        gold: dict[str, AnnotationSet] = {}
        files = sorted(
            p for p in candidates.iterdir()
            if p.is_file() and p.suffix in (".tsv", ".labels")
        )
        for path in files:
            for doc_id, frags in read_annotation_file(path).items():
                merged = gold.get(doc_id)
                base = merged.fragments if merged else ()
                gold[doc_id] = AnnotationSet(doc_id, base + tuple(frags))
    else:
        gold = _load_predictions(gold_path)
    pred = _load_predictions(Path(args.pred))

    if args.mode == "slc":
        if not args.articles:
            parser.error("--mode slc needs --articles to segment sentences")
        articles_dir = Path(args.articles)
        if (articles_dir / "articles").is_dir():
            articles_dir = articles_dir / "articles"
        documents = {
            p.stem: Document.from_text(p.stem, read_article_text(p))
            for p in sorted(articles_dir.glob("*.txt"))
        }
        gold_labels = _sentence_labels_from_fragments(documents, gold)
        pred_labels = _sentence_labels_from_fragments(documents, pred)
        report = metrics.slc_metrics(pred_labels, gold_labels)
    else:
        mode = MatchMode.FULL_TASK if args.mode == "full" else MatchMode.SPANS_ONLY
        # missing doc entries are empty sets so counts stay global
        all_ids = sorted(set(gold) | set(pred))
        gold_map = {d: gold.get(d, AnnotationSet(d, ())) for d in all_ids}
        pred_map = {d: pred.get(d, AnnotationSet(d, ())) for d in all_ids}
        report = metrics.f1(pred_map, gold_map, mode, per_technique=args.per_technique)

    print(_percent_line(report))
    if report.exceeds_unit_range:
        print("note: scores exceed 1; reference side has overlapping same-label fragments")
    if args.per_technique and report.per_technique:
        for identifier, sub in report.per_technique.items():
            print(f"{identifier}\t{_percent_line(sub)}\t|S| {sub.predicted_count}\t|T| {sub.gold_count}")
    _write_json(args.json, report.as_dict())
    return 0


def cmd_train(args, parser) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.seeds:
        config = replace(
            config, seeds=tuple(int(s) for s in args.seeds.split(",") if s.strip())
        )
    corpus = load_corpus(
        config.articles_dir,
        config.annotations_dir or None,
        config.split_dir or None,
        workers=_workers(),
    )
    result = run_experiment(config, corpus, run_dir=args.run_dir)
    print(f"seeds\t{','.join(str(s) for s in config.seeds)}")
    for task in ("flc_spans", "flc_full", "slc"):
        for seed in config.seeds:
            print(f"seed {seed}\t{task}\t{_percent_line(result.per_seed[seed][task])}")
        mean = result.mean[task]
        print(
            f"mean\t{task}\tP {100 * mean['precision']:.2f} "
            f"R {100 * mean['recall']:.2f} F1 {100 * mean['f1']:.2f}"
        )
    return 0


def cmd_predict(args, parser) -> int:
    config = ExperimentConfig.from_file(args.config)
    checkpoint = (
        Path(args.checkpoint)
        if args.checkpoint
        else Path(args.run_dir) / f"checkpoint_seed{config.seeds[0]}.bin"
    )
    if not checkpoint.exists():
        print(f"error: checkpoint {checkpoint} does not exist", file=sys.stderr)
        return 1
    model, _header = load_checkpoint(checkpoint)
    corpus = load_corpus(
        config.articles_dir,
        config.annotations_dir or None,
        config.split_dir or None,
        workers=_workers(),
    )
    doc_ids = corpus.doc_ids(args.split) if args.split != "all" else corpus.doc_ids()
    provider = provider_for(config)
    examples, alignments = build_examples(corpus, doc_ids, provider, config.max_tokens)
    token_preds, _ = predict_examples(model, examples)
    decoded = decode_predictions(token_preds, alignments)
    write_predictions_tsv(decoded, args.out)
    print(f"wrote {sum(len(a) for a in decoded.values())} fragments to {args.out}")
    return 0


def cmd_report(args, parser) -> int:
    scores_path = Path(args.run_dir) / "scores.json"
    if not scores_path.exists():
        print(f"error: {scores_path} does not exist", file=sys.stderr)
        return 1
    payload = json.loads(scores_path.read_text(encoding="utf-8"))
    print("task\tseed\tP\tR\tF1")
    for seed in sorted(payload["per_seed"], key=int):
        for task, rep in sorted(payload["per_seed"][seed].items()):
            print(
                f"{task}\t{seed}\t{100 * rep['precision']:.2f}"
                f"\t{100 * rep['recall']:.2f}\t{100 * rep['f1']:.2f}"
            )
    for task, mean in sorted(payload["mean"].items()):
        print(
            f"{task}\tmean\t{100 * mean['precision']:.2f}"
            f"\t{100 * mean['recall']:.2f}\t{100 * mean['f1']:.2f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="propspan",
        description="Fine-grained propaganda-technique corpus, scoring and training tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a corpus and check every invariant")
    _add_corpus_flags(p)

    p = sub.add_parser("stats", help="corpus statistics, optionally checked against expectations")
    _add_corpus_flags(p)
    p.add_argument("--source-labels", help="doc_id<TAB>prop|nonprop sidecar")
    p.add_argument("--expected", help="expected-stats JSON, or 'bundled'")
    p.add_argument("--length-tol", type=float, default=0.5)
    p.add_argument("--json", help="write the stats JSON here")
    p.add_argument("--tsv", help="write the technique table TSV here")

    p = sub.add_parser("split-check", help="per-split article/sentence counts")
    _add_corpus_flags(p)
    p.add_argument("--expected", help="expected-counts JSON, or 'bundled'")
    p.add_argument("--json", help="write the split report JSON here")

    p = sub.add_parser("score", help="score predictions against gold annotations")
    p.add_argument("--gold", required=True, help="gold annotation dir (or corpus root, or TSV)")
    p.add_argument("--pred", required=True, help="prediction TSV")
    p.add_argument("--mode", choices=("full", "spans", "slc"), default="full")
    p.add_argument("--articles", help="articles dir (required for --mode slc)")
    p.add_argument("--per-technique", action="store_true")
    p.add_argument("--json", help="write the score report JSON here")

    p = sub.add_parser("train", help="run a multi-seed experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir", required=True)
    p.add_argument("--seeds", help="comma-separated seed override")

    p = sub.add_parser("predict", help="emit scorer-compatible predictions from a checkpoint")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir", required=True)
    p.add_argument("--checkpoint", help="explicit checkpoint path")
    p.add_argument("--split", default="test", choices=("train", "dev", "test", "all"))
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="print the score table of a finished run")
    p.add_argument("--run-dir", required=True)

    return parser


_HANDLERS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "split-check": cmd_split_check,
    "score": cmd_score,
    "train": cmd_train,
    "predict": cmd_predict,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args, parser)
    except (CorpusError, EmbeddingFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
