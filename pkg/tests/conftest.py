"""Shared fixtures and the independent brute-force scoring oracle.

The oracle computes every quantity with per-character *set* arithmetic
(materialized position sets, not interval math) so it shares no code
path with the library implementation it checks.
"""

from __future__ import annotations

import numpy as np
import pytest

from propspan.model import TECHNIQUES, AnnotationSet, Document, Fragment, Technique


def oracle_credit(s: Fragment, t: Fragment, h: int, spans_only: bool) -> float:
    shared = len(set(range(s.begin, s.end)) & set(range(t.begin, t.end)))
    delta = 1.0 if spans_only or s.technique is t.technique else 0.0
    return shared / h * delta


def _oracle_sum(pred_map, gold_map, by_pred: bool, spans_only: bool) -> float:
    total = 0.0
    for doc_id, pred in pred_map.items():
        gold = gold_map.get(doc_id)
        if gold is None:
            continue
        for s in pred.fragments:
            for t in gold.fragments:
                h = len(set(range((s if by_pred else t).begin, (s if by_pred else t).end)))
                total += oracle_credit(s, t, h, spans_only)
    return total


def oracle_precision(pred_map, gold_map, spans_only: bool = False) -> float:
    n = sum(len(a) for a in pred_map.values())
    if n == 0:
        return 0.0
    return _oracle_sum(pred_map, gold_map, True, spans_only) / n


def oracle_recall(pred_map, gold_map, spans_only: bool = False) -> float:
    n = sum(len(a) for a in gold_map.values())
    if n == 0:
        return 0.0
    return _oracle_sum(pred_map, gold_map, False, spans_only) / n


def oracle_f1(p: float, r: float) -> float:
    return 0.0 if p <= 0 or r <= 0 else 2 * p * r / (p + r)


def random_annotation_set(
    rng: np.random.Generator,
    doc_id: str,
    max_fragments: int = 6,
    doc_length: int = 200,
    n_techniques: int = 4,
    allow_empty: bool = True,
) -> AnnotationSet:
    low = 0 if allow_empty else 1
    n = int(rng.integers(low, max_fragments + 1))
    fragments = []
    for _ in range(n):
        begin = int(rng.integers(0, doc_length - 1))
        end = int(rng.integers(begin + 1, doc_length + 1))
        technique = TECHNIQUES[int(rng.integers(0, n_techniques))]
        fragments.append(Fragment(begin, end, technique))
    return AnnotationSet(doc_id, tuple(fragments))


def ann(doc_id: str, *triples: tuple[int, int, Technique]) -> AnnotationSet:
    return AnnotationSet(doc_id, tuple(Fragment(b, e, t) for b, e, t in triples))


@pytest.fixture
def simple_doc() -> Document:
    # two lines: [0, 22) and [23, 44)
    return Document.from_text("doc1", "the quick brown fox aa\njumped over a lazy dog")
