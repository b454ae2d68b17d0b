"""End-to-end task runners.

This module turns a corpus into labeled training examples (sentence
labels plus per-token technique classes over an offset-preserving
tokenization), decodes token predictions back into character fragments,
and runs multi-seed experiments scored with the fragment metric and the
binary sentence metric.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import metrics
from .corpus import Corpus, write_predictions_tsv
from .embeddings import EmbeddingFileProvider, HashEmbeddings
from .metrics import MatchMode, ScoreReport
from .model import (
    NONE_CLASS,
    TECHNIQUES,
    AnnotationSet,
    Document,
    Fragment,
    sentence_label,
)
from .nn import (
    MgnModel,
    TrainSettings,
    TrainingExample,
    TrainingLog,
    build_model,
    forward,
    predict_sentence_label,
    predict_token_classes,
    save_checkpoint,
    train_model,
)

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

DEFAULT_MAX_TOKENS = 210


def tokenize_with_offsets(text: str, base: int = 0) -> list[tuple[int, int]]:
    """Word/punctuation token spans, as absolute character offsets."""
    return [(base + m.start(), base + m.end()) for m in _TOKEN_RE.finditer(text)]


@dataclass(frozen=True)
class TokenAlignment:
    """Per-sentence token spans for one document.

    Token spans are ordered, non-overlapping, and lie inside their
    sentence span. Sentences beyond the token budget are truncated, so
    dropped tokens take part in neither training nor decoding.
    """

    doc_id: str
    sentence_tokens: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self) -> None:
        for spans in self.sentence_tokens:
            prev_end = -1
            for begin, end in spans:
                if begin < prev_end or begin >= end:
                    raise ValueError(
                        f"doc {self.doc_id}: token spans must be ordered and non-empty"
                    )
                prev_end = end


def align_document(doc: Document, max_tokens: int | None = DEFAULT_MAX_TOKENS) -> TokenAlignment:
    per_sentence = []
    for span in doc.sentences:
        tokens = tokenize_with_offsets(doc.text[span.begin:span.end], base=span.begin)
        if max_tokens is not None:
            tokens = tokens[:max_tokens]
        per_sentence.append(tuple(tokens))
    return TokenAlignment(doc_id=doc.doc_id, sentence_tokens=tuple(per_sentence))


def project_gold_to_tokens(
    doc: Document, gold: AnnotationSet, alignment: TokenAlignment
) -> list[np.ndarray]:
    """Token class labels per sentence from character-level gold.

    A token takes the technique of a gold fragment overlapping it by at
    least one character, otherwise the none class. When several
    fragments overlap one token, the earliest-starting fragment wins,
    then the longer one, then the lower technique class id; the 19-way
    scheme admits exactly one label per token, so the order must be
    total.
    """
    if alignment.doc_id != doc.doc_id:
        raise ValueError("alignment does not belong to this document")
    labels = []
    for spans in alignment.sentence_tokens:
        sentence_labels = np.zeros(len(spans), dtype=int)
        for i, (begin, end) in enumerate(spans):
            candidates = [f for f in gold.fragments if f.overlaps_interval(begin, end)]
            if candidates:
                best = min(
                    candidates,
                    key=lambda f: (f.begin, -(f.end - f.begin), f.technique.class_index),
                )
                sentence_labels[i] = best.technique.class_index
        labels.append(sentence_labels)
    return labels


def decode_fragments(
    token_classes: Sequence[Sequence[int]],
    alignment: TokenAlignment,
) -> AnnotationSet:
    """Fragments from per-token classes: maximal same-class runs.

    A run of consecutive tokens sharing a non-none class becomes one
    fragment from the first token's begin to the last token's end;
    characters between tokens of a run (whitespace) are absorbed.
    """
    if len(token_classes) != len(alignment.sentence_tokens):
        raise ValueError("token classes do not match the alignment's sentence count")
    fragments: list[Fragment] = []
    for classes, spans in zip(token_classes, alignment.sentence_tokens):
        if len(classes) != len(spans):
            raise ValueError("token class count does not match token span count")
        run_class = NONE_CLASS
        run_begin = run_end = 0
        for cls, (begin, end) in [*zip(classes, spans), (NONE_CLASS, (0, 0))]:
            if cls == run_class and cls != NONE_CLASS:
                run_end = end
                continue
            if run_class != NONE_CLASS:
                fragments.append(
                    Fragment(run_begin, run_end, TECHNIQUES[run_class - 1])
                )
            run_class = int(cls)
            run_begin, run_end = begin, end
    return AnnotationSet(alignment.doc_id, tuple(fragments))


@dataclass(frozen=True)
class SentenceExample(TrainingExample):
    """A training example that remembers where it came from."""

    doc_id: str = ""
    sentence_index: int = -1
    token_spans: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, serializable as flat key = value lines."""

    mode: str = "mgn"
    gate: str = "sigmoid"
    alpha: float = 0.9
    seeds: tuple[int, ...] = (1, 2, 3)
    learning_rate: float = 3e-5
    weight_decay: float = 0.01
    batch_size: int = 16
    max_tokens: int = DEFAULT_MAX_TOKENS
    warmup_proportion: float = 0.1
    patience: int = 7
    max_epochs: int = 100
    embedding: str = "toy"  # "toy" or a path to an embedding file
    embedding_dim: int = 32
    positive_weight: str = "auto"  # "auto" or a float literal
    monitor: str = "flc_full"  # flc_full | flc_spans | slc
    articles_dir: str = ""
    annotations_dir: str = ""
    split_dir: str = ""

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("need at least one seed")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.monitor not in ("flc_full", "flc_spans", "slc"):
            raise ValueError(f"unknown monitor {self.monitor!r}")

    @classmethod
    def from_file(cls, path: Path | str) -> "ExperimentConfig":
        values: dict[str, str] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "ExperimentConfig":
        kwargs: dict = {}
        converters = {
            "alpha": float,
            "learning_rate": float,
            "weight_decay": float,
            "warmup_proportion": float,
            "batch_size": int,
            "max_tokens": int,
            "patience": int,
            "max_epochs": int,
            "embedding_dim": int,
            "seeds": lambda v: tuple(int(s) for s in v.split(",") if s.strip()),
        }
        valid = set(cls.__dataclass_fields__)
        for key, value in values.items():
            if key not in valid:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = converters.get(key, str)(value)
        return cls(**kwargs)

    def to_file(self, path: Path | str) -> None:
        lines = []
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if name == "seeds":
                value = ",".join(str(s) for s in value)
            lines.append(f"{name} = {value}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def resolved_positive_weight(self, labels: Sequence[int]) -> float:
        if self.positive_weight != "auto":
            return float(self.positive_weight)
        positives = sum(1 for y in labels if y)
        negatives = len(labels) - positives
        if positives == 0:
            return 1.0
        return negatives / positives


def provider_for(config: ExperimentConfig):
    if config.embedding == "toy":
        return HashEmbeddings(dimension=config.embedding_dim)
    return EmbeddingFileProvider.from_file(config.embedding)


def build_examples(
    corpus: Corpus,
    doc_ids: Sequence[str],
    provider,
    max_tokens: int,
) -> tuple[list[SentenceExample], dict[str, TokenAlignment]]:
    """Labeled sentence examples plus the alignment used per document.

    Toy providers embed the tokenizer's tokens; file providers supply
    both the vectors and the token offsets recorded at export time.
    Sentences without tokens (or absent from an embedding file) yield
    no example; they still count for sentence-level gold labels.
    """
    examples: list[SentenceExample] = []
    alignments: dict[str, TokenAlignment] = {}
    for doc_id in doc_ids:
        doc = corpus.documents[doc_id]
        gold = corpus.annotations_for(doc_id)
        if isinstance(provider, EmbeddingFileProvider):
            per_sentence = []
            for span in doc.sentences:
                record = provider.get(doc_id, span.index)
                if record is None:
                    per_sentence.append(())
                    continue
                offsets = record.token_offsets[:max_tokens]
                for begin, end in offsets:
                    if begin < span.begin or end > span.end:
                        raise ValueError(
                            f"embedding record {doc_id}#{span.index}: token "
                            f"[{begin}, {end}) lies outside sentence span "
                            f"[{span.begin}, {span.end})"
                        )
                per_sentence.append(offsets)
            alignment = TokenAlignment(doc_id=doc_id, sentence_tokens=tuple(per_sentence))
        else:
            alignment = align_document(doc, max_tokens=max_tokens)
        alignments[doc_id] = alignment
        token_labels = project_gold_to_tokens(doc, gold, alignment)
        for span in doc.sentences:
            spans = alignment.sentence_tokens[span.index]
            if not spans:
                continue
            if isinstance(provider, EmbeddingFileProvider):
                # row 0 plus one row per kept token (file budgets may exceed ours)
                matrix = provider.get(doc_id, span.index).matrix[: len(spans) + 1]
            else:
                tokens = [doc.text[b:e] for b, e in spans]
                matrix = provider.encode(tokens)
            examples.append(
                SentenceExample(
                    embeddings=matrix,
                    sentence_label=int(sentence_label(doc, gold, span.index)),
                    token_classes=token_labels[span.index],
                    doc_id=doc_id,
                    sentence_index=span.index,
                    token_spans=spans,
                )
            )
    return examples, alignments


def predict_examples(
    model: MgnModel, examples: Sequence[SentenceExample]
) -> tuple[dict[str, dict[int, np.ndarray]], dict[tuple[str, int], int]]:
    """Token-class and sentence-label predictions keyed by document/sentence."""
    token_predictions: dict[str, dict[int, np.ndarray]] = {}
    slc_predictions: dict[tuple[str, int], int] = {}
    for example in examples:
        fwd = forward(model, example.embeddings)
        token_predictions.setdefault(example.doc_id, {})[example.sentence_index] = (
            predict_token_classes(model, fwd)
        )
        slc_predictions[(example.doc_id, example.sentence_index)] = (
            predict_sentence_label(fwd)
        )
    return token_predictions, slc_predictions


def decode_predictions(
    token_predictions: Mapping[str, Mapping[int, np.ndarray]],
    alignments: Mapping[str, TokenAlignment],
) -> dict[str, AnnotationSet]:
    """Assemble per-document annotation sets from per-sentence token classes."""
    decoded: dict[str, AnnotationSet] = {}
    for doc_id, alignment in alignments.items():
        per_sentence = token_predictions.get(doc_id, {})
        classes = [
            per_sentence.get(i, np.zeros(len(spans), dtype=int))
            for i, spans in enumerate(alignment.sentence_tokens)
        ]
        decoded[doc_id] = decode_fragments(classes, alignment)
    return decoded


def gold_sentence_labels(corpus: Corpus, doc_ids: Sequence[str]) -> list[tuple[str, int, int]]:
    """(doc_id, sentence_index, label) for every sentence, deterministic order."""
    out = []
    for doc_id in doc_ids:
        doc = corpus.documents[doc_id]
        gold = corpus.annotations_for(doc_id)
        for span in doc.sentences:
            out.append((doc_id, span.index, int(sentence_label(doc, gold, span.index))))
    return out


def score_predictions(
    corpus: Corpus,
    doc_ids: Sequence[str],
    decoded: Mapping[str, AnnotationSet],
    slc_predictions: Mapping[tuple[str, int], int],
) -> dict[str, ScoreReport]:
    """Fragment scores in both modes plus sentence-level binary scores."""
    gold_map = {d: corpus.annotations_for(d) for d in doc_ids}
    pred_map = {d: decoded.get(d, AnnotationSet(d, ())) for d in doc_ids}
    labeled = gold_sentence_labels(corpus, doc_ids)
    gold_labels = [y for _, _, y in labeled]
    pred_labels = [slc_predictions.get((d, i), 0) for d, i, _ in labeled]
    return {
        "flc_full": metrics.f1(pred_map, gold_map, MatchMode.FULL_TASK),
        "flc_spans": metrics.f1(pred_map, gold_map, MatchMode.SPANS_ONLY),
        "slc": metrics.slc_metrics(pred_labels, gold_labels),
    }


def all_propaganda_baseline(corpus: Corpus, split: str | None = "test") -> ScoreReport:
    """Sentence-level scores of the constant positive predictor."""
    doc_ids = corpus.doc_ids(split)
    labeled = gold_sentence_labels(corpus, doc_ids)
    gold_labels = [y for _, _, y in labeled]
    return metrics.slc_metrics([1] * len(gold_labels), gold_labels)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    per_seed: Mapping[int, Mapping[str, ScoreReport]]
    mean: Mapping[str, Mapping[str, float]]
    logs: Mapping[int, TrainingLog]

    def as_dict(self) -> dict:
        return {
            "per_seed": {
                str(seed): {task: rep.as_dict() for task, rep in reports.items()}
                for seed, reports in self.per_seed.items()
            },
            "mean": {task: dict(vals) for task, vals in self.mean.items()},
        }


def _mean_scores(
    per_seed: Mapping[int, Mapping[str, ScoreReport]]
) -> dict[str, dict[str, float]]:
    tasks = next(iter(per_seed.values())).keys()
    out: dict[str, dict[str, float]] = {}
    for task in tasks:
        reports = [per_seed[seed][task] for seed in per_seed]
        out[task] = {
            "precision": float(np.mean([r.precision for r in reports])),
            "recall": float(np.mean([r.recall for r in reports])),
            "f1": float(np.mean([r.f1 for r in reports])),
        }
    return out


def run_experiment(
    config: ExperimentConfig,
    corpus: Corpus,
    run_dir: Path | str | None = None,
) -> ExperimentResult:
    """Train per seed, early-stop on the dev score, evaluate on test.

    Reports the per-seed score reports and their arithmetic mean.
    Deterministic for a fixed config, corpus and embedding source. With
    ``run_dir`` set, writes the config snapshot, per-seed checkpoints,
    scorer-compatible prediction files, training logs and a scores.json.
    """
    if not corpus.split:
        raise ValueError("corpus has no split assignment; experiments need one")
    provider = provider_for(config)

    train_ids = corpus.doc_ids("train")
    dev_ids = corpus.doc_ids("dev")
    test_ids = corpus.doc_ids("test")
    if not train_ids:
        raise ValueError("training split is empty")

    train_examples, _ = build_examples(corpus, train_ids, provider, config.max_tokens)
    dev_examples, dev_alignments = build_examples(corpus, dev_ids, provider, config.max_tokens)
    test_examples, test_alignments = build_examples(corpus, test_ids, provider, config.max_tokens)

    positive_weight = config.resolved_positive_weight(
        [ex.sentence_label for ex in train_examples]
    )
    settings = TrainSettings(
        learning_rate=config.learning_rate,
        weight_decay=config.weight_decay,
        batch_size=config.batch_size,
        max_epochs=config.max_epochs,
        patience=config.patience,
        warmup_proportion=config.warmup_proportion,
    )

    def evaluate(model: MgnModel, examples, alignments, doc_ids) -> dict[str, ScoreReport]:
        token_preds, slc_preds = predict_examples(model, examples)
        decoded = decode_predictions(token_preds, alignments)
        return score_predictions(corpus, doc_ids, decoded, slc_preds)

    run_path = Path(run_dir) if run_dir is not None else None
    if run_path is not None:
        run_path.mkdir(parents=True, exist_ok=True)
        config.to_file(run_path / "config.txt")

    per_seed: dict[int, dict[str, ScoreReport]] = {}
    logs: dict[int, TrainingLog] = {}
    for seed in config.seeds:
        model = build_model(
            mode=config.mode,
            dim=provider.dimension,
            gate_activation=config.gate,
            alpha=config.alpha,
            positive_weight=positive_weight,
            seed=seed,
        )
        rng = np.random.default_rng(seed)

        if dev_examples:
            def dev_score(m: MgnModel) -> float:
                return evaluate(m, dev_examples, dev_alignments, dev_ids)[config.monitor].f1
        else:
            def dev_score(m: MgnModel) -> float:
                return 0.0

        log = train_model(model, train_examples, settings, dev_score, rng)
        logs[seed] = log
        reports = evaluate(model, test_examples, test_alignments, test_ids)
        per_seed[seed] = reports

        if run_path is not None:
            save_checkpoint(model, run_path / f"checkpoint_seed{seed}.bin", seed=seed)
            token_preds, _ = predict_examples(model, test_examples)
            decoded = decode_predictions(token_preds, test_alignments)
            write_predictions_tsv(decoded, run_path / f"predictions_seed{seed}.tsv")
            (run_path / f"training_log_seed{seed}.tsv").write_text(
                log.to_tsv(), encoding="utf-8"
            )

    result = ExperimentResult(
        config=config,
        per_seed=per_seed,
        mean=_mean_scores(per_seed),
        logs=logs,
    )
    if run_path is not None:
        (run_path / "scores.json").write_text(
            json.dumps(result.as_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
    return result
