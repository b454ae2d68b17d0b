"""Deterministic synthetic corpora for tests, demos and smoke training.

Sentences are built from a filler vocabulary plus one marker word per
technique. Marker tokens are always labeled with their technique and
fillers never are, so the token-level task is separable for any
embedding that keeps distinct words apart, and gold fragments land
exactly on token boundaries (decoding can reconstruct them verbatim).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import Corpus, write_corpus, write_split_dir
from .model import TECHNIQUES, AnnotationSet, Document, Fragment, Technique

_FILLERS = (
    "the", "committee", "said", "yesterday", "that", "members", "will",
    "review", "several", "reports", "about", "local", "funding", "plans",
    "before", "voting", "on", "them", "next", "week",
)


def _marker(technique: Technique) -> str:
    return f"mk{technique.class_index:02d}x"


def _build_sentence(
    rng: np.random.Generator,
    techniques: tuple[Technique, ...],
    positive: bool,
) -> tuple[str, list[tuple[int, int, Technique]]]:
    """One sentence string plus its fragment triples (relative offsets)."""
    words: list[str] = list(rng.choice(_FILLERS, size=rng.integers(3, 6)))
    fragments: list[tuple[int, int, Technique]] = []
    if positive:
        for technique in rng.choice(techniques, size=rng.integers(1, 3), replace=False):
            run = [_marker(technique)] * int(rng.integers(1, 3))
            insert_at = int(rng.integers(1, len(words) + 1))
            words = words[:insert_at] + run + words[insert_at:]
    text = " ".join(words)
    pos = 0
    current: tuple[int, Technique] | None = None
    for word in words:
        end = pos + len(word)
        technique = next(
            (t for t in techniques if word == _marker(t)), None
        )
        if technique is not None:
            if current is not None and current[1] is technique:
                pass  # run continues, keep the start
            else:
                if current is not None:
                    fragments.append((current[0], prev_end, current[1]))
                current = (pos, technique)
            prev_end = end
        else:
            if current is not None:
                fragments.append((current[0], prev_end, current[1]))
                current = None
        pos = end + 1
    if current is not None:
        fragments.append((current[0], prev_end, current[1]))
    return text, fragments


def make_separable_corpus(
    n_sentences: int = 20,
    n_techniques: int = 4,
    positive_rate: float = 0.6,
    seed: int = 0,
    doc_id: str = "synthetic0001",
) -> Corpus:
    """A one-document corpus whose sentences are separable by word identity."""
    rng = np.random.default_rng(seed)
    techniques = TECHNIQUES[:n_techniques]
    lines: list[str] = []
    fragments: list[Fragment] = []
    offset = 0
    for i in range(n_sentences):
        positive = rng.random() < positive_rate or i == 0  # at least one positive
        text, triples = _build_sentence(rng, techniques, positive)
        for begin, end, technique in triples:
            fragments.append(Fragment(offset + begin, offset + end, technique))
        lines.append(text)
        offset += len(text) + 1
    full_text = "\n".join(lines)
    doc = Document.from_text(doc_id, full_text)
    return Corpus(
        documents={doc_id: doc},
        gold={doc_id: AnnotationSet(doc_id, tuple(fragments))},
        split={doc_id: "train"},
    )


def make_multi_article_corpus(
    n_articles: int = 30,
    sentences_per_article: tuple[int, int] = (4, 9),
    n_techniques: int = 6,
    seed: int = 0,
) -> Corpus:
    """A multi-document corpus with a 70/15/15-ish train/dev/test split."""
    rng = np.random.default_rng(seed)
    techniques = TECHNIQUES[:n_techniques]
    documents = {}
    gold = {}
    split = {}
    for a in range(n_articles):
        doc_id = f"synthetic{a + 1:04d}"
        n_sent = int(rng.integers(*sentences_per_article))
        lines = []
        fragments: list[Fragment] = []
        offset = 0
        for _ in range(n_sent):
            positive = rng.random() < 0.45
            text, triples = _build_sentence(rng, techniques, positive)
            for begin, end, technique in triples:
                fragments.append(Fragment(offset + begin, offset + end, technique))
            lines.append(text)
            offset += len(text) + 1
        documents[doc_id] = Document.from_text(doc_id, "\n".join(lines))
        gold[doc_id] = AnnotationSet(doc_id, tuple(fragments))
        split[doc_id] = ("train", "dev", "test")[
            0 if a < 0.7 * n_articles else (1 if a < 0.85 * n_articles else 2)
        ]
    return Corpus(documents=documents, gold=gold, split=split)


def write_corpus_fixture(root: Path | str, corpus: Corpus) -> Path:
    """Materialize a corpus in the bundled-root layout; returns the root."""
    root = Path(root)
    write_corpus(corpus, root / "articles", root / "annotations")
    if corpus.split:
        write_split_dir(corpus.split, root / "splits")
    return root
