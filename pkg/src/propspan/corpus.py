"""Corpus loading, writing, statistics and split verification.

On-disk layout conventions:

* articles: one UTF-8 ``<doc_id>.txt`` per article; the file content is
  the document text, offsets index it as-is (line breaks included).
* annotations: UTF-8 TSV files, one row per fragment with columns
  ``doc_id, technique_identifier, begin, end``, no header. The writer
  produces one ``<doc_id>.labels.tsv`` per document; the reader accepts
  any ``*.tsv`` / ``*.labels`` files and groups rows by their doc_id
  column.
* splits: plain-text files ``train.txt``, ``dev.txt``, ``test.txt`` in
  one directory, one doc_id per line.
* source labels (optional sidecar): TSV rows ``doc_id, label`` with
  label ``prop`` or ``nonprop``.

A corpus root directory bundles these as ``articles/``,
``annotations/``, ``splits/`` and ``source_labels.tsv``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .model import (
    TECHNIQUES,
    AnnotationSet,
    Document,
    Fragment,
    Technique,
    UnknownTechniqueError,
    sentence_label,
)

SPLIT_NAMES = ("train", "dev", "test")
SOURCE_LABELS = ("prop", "nonprop")


class CorpusError(ValueError):
    """A malformed corpus file; the message carries file and line context."""


def read_article_text(path: Path | str) -> str:
    """Article text with line endings preserved as written.

    Newline translation would silently shift every character offset
    after the first CRLF, so it is disabled; a CR before a line feed is
    ordinary in-sentence text as far as offsets are concerned.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


@dataclass(frozen=True)
class Corpus:
    """Documents plus gold annotations and an optional split assignment."""

    documents: Mapping[str, Document]
    gold: Mapping[str, AnnotationSet]
    split: Mapping[str, str]

    def __post_init__(self) -> None:
        for doc_id, ann in self.gold.items():
            doc = self.documents.get(doc_id)
            if doc is None:
                raise CorpusError(f"annotations reference unknown doc {doc_id!r}")
            ann.validate_against(doc)
        for doc_id, split in self.split.items():
            if doc_id not in self.documents:
                raise CorpusError(f"split assigns unknown doc {doc_id!r}")
            if split not in SPLIT_NAMES:
                raise CorpusError(f"unknown split name {split!r} for doc {doc_id!r}")

    def doc_ids(self, split: str | None = None) -> list[str]:
        """Doc ids in deterministic (sorted) order, optionally one split only."""
        ids = sorted(self.documents)
        if split is None:
            return ids
        return [d for d in ids if self.split.get(d) == split]

    def annotations_for(self, doc_id: str) -> AnnotationSet:
        return self.gold.get(doc_id, AnnotationSet(doc_id, ()))

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class TechniqueStats:
    technique: Technique
    count: int
    mean_length: float
    std_length: float


@dataclass(frozen=True)
class SplitCounts:
    articles: int
    sentences: int


@dataclass(frozen=True)
class CorpusStats:
    """Deterministic corpus statistics.

    The technique table is sorted by count descending (ties in catalog
    order); length statistics use the population standard deviation.
    Sentence counts are exposed both without blank lines (the sentence
    model) and with them, since either line-counting convention appears
    in the wild.
    """

    total_articles: int
    articles_by_source: Mapping[str, int] | None
    avg_length_lines: float
    avg_length_lines_with_blank: float
    avg_length_words: float
    avg_length_chars: float
    technique_stats: tuple[TechniqueStats, ...]
    total_instances: int
    sentence_count: int
    line_count_with_blank: int
    sentences_with_technique: int
    technique_sentence_fraction: float
    per_split: Mapping[str, SplitCounts] | None

    def as_dict(self) -> dict:
        out: dict = {
            "articles": {
                "total": self.total_articles,
                "by_source": dict(self.articles_by_source)
                if self.articles_by_source is not None
                else None,
            },
            "avg_length": {
                "lines": self.avg_length_lines,
                "lines_with_blank": self.avg_length_lines_with_blank,
                "words": self.avg_length_words,
                "chars": self.avg_length_chars,
            },
            "techniques": [
                {
                    "technique": t.technique.identifier,
                    "count": t.count,
                    "mean_length": t.mean_length,
                    "std_length": t.std_length,
                }
                for t in self.technique_stats
            ],
            "total_instances": self.total_instances,
            "sentences": {
                "total": self.sentence_count,
                "total_with_blank_lines": self.line_count_with_blank,
                "with_technique": self.sentences_with_technique,
                "fraction_with_technique": self.technique_sentence_fraction,
            },
        }
        if self.per_split is not None:
            out["per_split"] = {
                name: {"articles": c.articles, "sentences": c.sentences}
                for name, c in self.per_split.items()
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_tsv(self) -> str:
        lines = ["technique\tcount\tmean_length\tstd_length"]
        for t in self.technique_stats:
            lines.append(
                f"{t.technique.identifier}\t{t.count}"
                f"\t{t.mean_length:.2f}\t{t.std_length:.2f}"
            )
        lines.append(f"all\t{self.total_instances}\t\t")
        return "\n".join(lines) + "\n"


def _parse_annotation_row(
    line: str, path: Path, lineno: int
) -> tuple[str, Fragment]:
    parts = line.rstrip("\r\n").split("\t")
    if len(parts) != 4:
        raise CorpusError(
            f"{path}:{lineno}: expected 4 tab-separated columns "
            f"(doc_id, technique, begin, end), got {len(parts)}"
        )
    doc_id, identifier, begin_s, end_s = parts
    try:
        technique = Technique.from_identifier(identifier)
    except UnknownTechniqueError as exc:
        raise CorpusError(f"{path}:{lineno}: {exc}") from None
    try:
        begin, end = int(begin_s), int(end_s)
    except ValueError:
        raise CorpusError(
            f"{path}:{lineno}: offsets must be integers, got "
            f"{begin_s!r}, {end_s!r}"
        ) from None
    try:
        fragment = Fragment(begin, end, technique)
    except ValueError as exc:
        raise CorpusError(f"{path}:{lineno}: {exc}") from None
    return doc_id, fragment


def read_annotation_file(path: Path | str) -> dict[str, list[Fragment]]:
    """Parse one annotation TSV; rows grouped by their doc_id column.

    Blank lines are tolerated. Malformed rows raise CorpusError with
    file and line number.
    """
    path = Path(path)
    grouped: dict[str, list[Fragment]] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            doc_id, fragment = _parse_annotation_row(line, path, lineno)
            grouped.setdefault(doc_id, []).append(fragment)
    return grouped


def _annotation_files(annotation_dir: Path) -> list[Path]:
    files = sorted(
        p
        for p in annotation_dir.iterdir()
        if p.is_file() and (p.suffix == ".tsv" or p.suffix == ".labels")
    )
    return files


def read_split_dir(split_dir: Path | str) -> dict[str, str]:
    """Read train/dev/test id lists; missing files mean an empty split."""
    split_dir = Path(split_dir)
    assignment: dict[str, str] = {}
    for name in SPLIT_NAMES:
        path = split_dir / f"{name}.txt"
        if not path.exists():
            continue
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            doc_id = line.strip()
            if not doc_id:
                continue
            if doc_id in assignment:
                raise CorpusError(
                    f"{path}:{lineno}: doc {doc_id!r} assigned to both "
                    f"{assignment[doc_id]!r} and {name!r}"
                )
            assignment[doc_id] = name
    return assignment


def read_source_labels(path: Path | str) -> dict[str, str]:
    path = Path(path)
    labels: dict[str, str] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\r\n").split("\t")
            if len(parts) != 2 or parts[1] not in SOURCE_LABELS:
                raise CorpusError(
                    f"{path}:{lineno}: expected 'doc_id<TAB>prop|nonprop'"
                )
            labels[parts[0]] = parts[1]
    return labels


def load_corpus(
    article_dir: Path | str,
    annotation_dir: Path | str | None = None,
    split_dir: Path | str | None = None,
    workers: int = 1,
) -> Corpus:
    """Load and fully validate a corpus.

    Every fragment is checked against its document (existence and
    bounds); the split assignment, when present, may only reference
    loaded documents.
    """
    article_dir = Path(article_dir)
    if not article_dir.is_dir():
        raise CorpusError(f"article directory {article_dir} does not exist")
    article_paths = sorted(article_dir.glob("*.txt"))
    if not article_paths:
        raise CorpusError(f"no *.txt articles found in {article_dir}")

    def _read(path: Path) -> Document:
        return Document.from_text(path.stem, read_article_text(path))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            docs = list(pool.map(_read, article_paths))
    else:
        docs = [_read(p) for p in article_paths]
    documents = {d.doc_id: d for d in docs}

    fragments: dict[str, list[Fragment]] = {}
    if annotation_dir is not None:
        annotation_dir = Path(annotation_dir)
        if not annotation_dir.is_dir():
            raise CorpusError(f"annotation directory {annotation_dir} does not exist")
        for path in _annotation_files(annotation_dir):
            for doc_id, rows in read_annotation_file(path).items():
                if doc_id not in documents:
                    raise CorpusError(
                        f"{path}: annotation references unknown doc {doc_id!r}"
                    )
                fragments.setdefault(doc_id, []).extend(rows)

    gold: dict[str, AnnotationSet] = {}
    for doc_id, frags in fragments.items():
        doc = documents[doc_id]
        for f in frags:
            if f.end > len(doc.text):
                raise CorpusError(
                    f"doc {doc_id}: fragment offsets [{f.begin}, {f.end}) exceed "
                    f"document length {len(doc.text)}"
                )
        gold[doc_id] = AnnotationSet(doc_id, tuple(frags))

    split = read_split_dir(split_dir) if split_dir is not None else {}
    return Corpus(documents=documents, gold=gold, split=split)


def load_corpus_root(root: Path | str, workers: int = 1) -> Corpus:
    """Load a corpus from the bundled-root layout (articles/, annotations/, splits/)."""
    root = Path(root)
    annotation_dir = root / "annotations"
    split_dir = root / "splits"
    return load_corpus(
        root / "articles",
        annotation_dir if annotation_dir.is_dir() else None,
        split_dir if split_dir.is_dir() else None,
        workers=workers,
    )


def canonical_rows(annotations: Mapping[str, AnnotationSet]) -> list[str]:
    """Annotation rows in canonical order: doc_id, begin, end, technique."""
    rows = []
    for doc_id in sorted(annotations):
        frags = sorted(
            annotations[doc_id].fragments,
            key=lambda f: (f.begin, f.end, f.technique.class_index),
        )
        for f in frags:
            rows.append(f"{doc_id}\t{f.technique.identifier}\t{f.begin}\t{f.end}")
    return rows


def write_annotations(
    annotations: Mapping[str, AnnotationSet], annotation_dir: Path | str
) -> None:
    annotation_dir = Path(annotation_dir)
    annotation_dir.mkdir(parents=True, exist_ok=True)
    for doc_id in sorted(annotations):
        rows = canonical_rows({doc_id: annotations[doc_id]})
        out = annotation_dir / f"{doc_id}.labels.tsv"
        out.write_text("".join(r + "\n" for r in rows), encoding="utf-8")


def write_predictions_tsv(
    annotations: Mapping[str, AnnotationSet], path: Path | str
) -> None:
    """One scorer-compatible TSV holding every document's fragments."""
    rows = canonical_rows(annotations)
    Path(path).write_text("".join(r + "\n" for r in rows), encoding="utf-8")


def write_corpus(
    corpus: Corpus, article_dir: Path | str, annotation_dir: Path | str
) -> None:
    article_dir = Path(article_dir)
    article_dir.mkdir(parents=True, exist_ok=True)
    for doc_id in sorted(corpus.documents):
        # newline="" keeps the text byte-for-byte, mirroring the reader
        with open(article_dir / f"{doc_id}.txt", "w", encoding="utf-8", newline="") as fh:
            fh.write(corpus.documents[doc_id].text)
    write_annotations(corpus.gold, annotation_dir)


def write_split_dir(split: Mapping[str, str], split_dir: Path | str) -> None:
    split_dir = Path(split_dir)
    split_dir.mkdir(parents=True, exist_ok=True)
    for name in SPLIT_NAMES:
        ids = sorted(d for d, s in split.items() if s == name)
        (split_dir / f"{name}.txt").write_text(
            "".join(i + "\n" for i in ids), encoding="utf-8"
        )


def _population_std(values: Sequence[int], mean: float) -> float:
    if not values:
        return 0.0
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def compute_stats(
    corpus: Corpus, source_labels: Mapping[str, str] | None = None
) -> CorpusStats:
    """Deterministic statistics; invariant under document order."""
    if not corpus.documents:
        raise CorpusError("cannot compute statistics for an empty corpus")

    doc_ids = corpus.doc_ids()
    by_source: dict[str, int] | None = None
    if source_labels is not None:
        by_source = {"prop": 0, "nonprop": 0}
        for doc_id in doc_ids:
            label = source_labels.get(doc_id)
            if label in by_source:
                by_source[label] += 1

    n = len(doc_ids)
    nonblank_lines = words = chars = lines_with_blank = 0
    sentence_count = 0
    sentences_with_technique = 0
    for doc_id in doc_ids:
        doc = corpus.documents[doc_id]
        gold = corpus.annotations_for(doc_id)
        nonblank_lines += len(doc.sentences)
        lines_with_blank += doc.text.count("\n") + (
            0 if doc.text.endswith("\n") or not doc.text else 1
        )
        words += len(doc.text.split())
        chars += len(doc.text)
        sentence_count += len(doc.sentences)
        for s in doc.sentences:
            if sentence_label(doc, gold, s.index):
                sentences_with_technique += 1

    lengths_by_technique: dict[Technique, list[int]] = {t: [] for t in TECHNIQUES}
    for doc_id in doc_ids:
        for f in corpus.annotations_for(doc_id).fragments:
            lengths_by_technique[f.technique].append(f.length)

    technique_stats = []
    total_instances = 0
    for technique in TECHNIQUES:
        lengths = lengths_by_technique[technique]
        count = len(lengths)
        total_instances += count
        mean = sum(lengths) / count if count else 0.0
        technique_stats.append(
            TechniqueStats(
                technique=technique,
                count=count,
                mean_length=mean,
                std_length=_population_std(lengths, mean),
            )
        )
    technique_stats.sort(key=lambda t: (-t.count, t.technique.class_index))

    per_split: dict[str, SplitCounts] | None = None
    if corpus.split:
        per_split = {}
        for name in SPLIT_NAMES:
            ids = corpus.doc_ids(name)
            per_split[name] = SplitCounts(
                articles=len(ids),
                sentences=sum(len(corpus.documents[d].sentences) for d in ids),
            )

    return CorpusStats(
        total_articles=n,
        articles_by_source=by_source,
        avg_length_lines=nonblank_lines / n,
        avg_length_lines_with_blank=lines_with_blank / n,
        avg_length_words=words / n,
        avg_length_chars=chars / n,
        technique_stats=tuple(technique_stats),
        total_instances=total_instances,
        sentence_count=sentence_count,
        line_count_with_blank=lines_with_blank,
        sentences_with_technique=sentences_with_technique,
        technique_sentence_fraction=(
            sentences_with_technique / sentence_count if sentence_count else 0.0
        ),
        per_split=per_split,
    )


def compare_stats(
    stats: CorpusStats, expected: Mapping, length_tolerance: float = 0.5
) -> list[str]:
    """Compare computed statistics against an expected-values table.

    Counts must match exactly; mean/std fragment lengths within
    ``length_tolerance``. Only keys present in ``expected`` are
    checked. Returns a list of human-readable mismatches (empty means
    the check passed).
    """
    problems: list[str] = []

    def check_exact(name: str, got, want) -> None:
        if got != want:
            problems.append(f"{name}: expected {want}, got {got}")

    def check_close(name: str, got: float, want: float, tol: float) -> None:
        if abs(got - want) > tol:
            problems.append(f"{name}: expected {want} +/- {tol}, got {got}")

    if "articles" in expected:
        check_exact("articles", stats.total_articles, expected["articles"])
    if "total_instances" in expected:
        check_exact("total_instances", stats.total_instances, expected["total_instances"])
    if "sentences" in expected:
        check_exact("sentences", stats.sentence_count, expected["sentences"])
    if "fraction_with_technique" in expected:
        check_close(
            "fraction_with_technique",
            stats.technique_sentence_fraction,
            float(expected["fraction_with_technique"]),
            0.001,
        )
    by_id = {t.technique.identifier: t for t in stats.technique_stats}
    for identifier, want in expected.get("techniques", {}).items():
        got = by_id.get(identifier)
        if got is None:
            problems.append(f"techniques.{identifier}: not a known technique")
            continue
        if "count" in want:
            check_exact(f"techniques.{identifier}.count", got.count, want["count"])
        if "mean_length" in want:
            check_close(
                f"techniques.{identifier}.mean_length",
                got.mean_length,
                float(want["mean_length"]),
                length_tolerance,
            )
        if "std_length" in want:
            check_close(
                f"techniques.{identifier}.std_length",
                got.std_length,
                float(want["std_length"]),
                length_tolerance,
            )
    return problems


@dataclass(frozen=True)
class SplitReport:
    """Per-split article/sentence counts plus mismatches against expectations."""

    counts: Mapping[str, SplitCounts]
    unassigned_articles: int
    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def as_dict(self) -> dict:
        return {
            "counts": {
                name: {"articles": c.articles, "sentences": c.sentences}
                for name, c in self.counts.items()
            },
            "unassigned_articles": self.unassigned_articles,
            "mismatches": list(self.mismatches),
            "ok": self.ok,
        }


def verify_split(corpus: Corpus, expected: Mapping | None = None) -> SplitReport:
    """Count articles and sentences per split and compare with ``expected``.

    ``expected`` maps split name to ``{"articles": n, "sentences": m}``;
    either key may be omitted.
    """
    if not corpus.split:
        raise CorpusError("corpus has no split assignment")
    counts: dict[str, SplitCounts] = {}
    for name in SPLIT_NAMES:
        ids = corpus.doc_ids(name)
        counts[name] = SplitCounts(
            articles=len(ids),
            sentences=sum(len(corpus.documents[d].sentences) for d in ids),
        )
    unassigned = len(corpus.documents) - sum(c.articles for c in counts.values())

    mismatches: list[str] = []
    if expected:
        for name, want in expected.items():
            if name not in counts:
                mismatches.append(f"unknown split {name!r} in expected counts")
                continue
            got = counts[name]
            if "articles" in want and got.articles != want["articles"]:
                mismatches.append(
                    f"{name}: expected {want['articles']} articles, got {got.articles}"
                )
            if "sentences" in want and got.sentences != want["sentences"]:
                mismatches.append(
                    f"{name}: expected {want['sentences']} sentences, got {got.sentences}"
                )
    return SplitReport(
        counts=counts, unassigned_articles=unassigned, mismatches=tuple(mismatches)
    )
