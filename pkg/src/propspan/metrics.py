"""Partial-overlap precision, recall and F1 for labeled character spans.

The credit a (predicted, reference) fragment pair earns is the size of
their character intersection divided by a normalizing length, times a
label-agreement factor. Precision normalizes each pair by the predicted
fragment's length and the total by the number of predictions; recall
normalizes by the reference fragment's length and the number of
reference fragments. Dividing by the set sizes penalizes systems that
predict too many or too few instances: splitting one perfect prediction
into a perfect one plus a poorly overlapping one strictly lowers
precision.

Credits are summed over every pair, so a prediction overlapping several
same-label reference fragments is credited for each of them, and the
totals are never clamped: a reference side that contains overlapping
same-label fragments can push a score above 1. The report flags that
condition instead of silently altering the formula.

Multi-document scoring is a micro-average: credits are summed within
each document (cross-document pairs earn nothing) and divided by the
global fragment counts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from .model import TECHNIQUES, AnnotationSet, Fragment, Technique

#: Scoring accepts one annotation set (single document) or a mapping
#: from doc_id to annotation set (whole corpus).
AnnotationsLike = Union[AnnotationSet, Mapping[str, AnnotationSet]]

#: Label-agreement hook: returns the credit factor for a pair of
#: technique labels. The shipped default is strict equality.
LabelMatch = Callable[[Technique, Technique], float]


class MatchMode(enum.Enum):
    """Whether technique labels take part in the credit."""

    FULL_TASK = "full"
    SPANS_ONLY = "spans"


def strict_label_match(a: Technique, b: Technique) -> float:
    return 1.0 if a is b else 0.0


_UNIT_EPS = 1e-9


@dataclass(frozen=True)
class ScoreReport:
    """Precision/recall/F1 plus the counts they were normalized by.

    ``f1`` is the harmonic mean of precision and recall and is 0
    whenever either of them is 0. ``exceeds_unit_range`` is set when a
    value lands above 1, which the unclamped formulas permit for
    reference sides with overlapping same-label fragments.
    """

    precision: float
    recall: float
    f1: float
    predicted_count: int
    gold_count: int
    mode: str | None = None
    per_technique: Mapping[str, "ScoreReport"] | None = None
    exceeds_unit_range: bool = False

    @classmethod
    def from_precision_recall(
        cls,
        precision: float,
        recall: float,
        predicted_count: int,
        gold_count: int,
        mode: str | None = None,
        per_technique: Mapping[str, "ScoreReport"] | None = None,
    ) -> "ScoreReport":
        return cls(
            precision=precision,
            recall=recall,
            f1=harmonic_mean(precision, recall),
            predicted_count=predicted_count,
            gold_count=gold_count,
            mode=mode,
            per_technique=per_technique,
            exceeds_unit_range=(precision > 1 + _UNIT_EPS or recall > 1 + _UNIT_EPS),
        )

    def as_dict(self) -> dict:
        out: dict = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "predicted_count": self.predicted_count,
            "gold_count": self.gold_count,
            "mode": self.mode,
            "exceeds_unit_range": self.exceeds_unit_range,
        }
        if self.per_technique is not None:
            out["per_technique"] = {
                key: rep.as_dict() for key, rep in self.per_technique.items()
            }
        return out


def harmonic_mean(precision: float, recall: float) -> float:
    if precision <= 0 or recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def overlap_credit(
    s: Fragment,
    t: Fragment,
    h: int,
    mode: MatchMode = MatchMode.FULL_TASK,
    label_match: LabelMatch | None = None,
) -> float:
    """Credit for one fragment pair: |s intersect t| / h times label agreement.

    ``h`` is the normalizing length (the predicted fragment's length for
    precision, the reference fragment's for recall). In spans-only mode
    the label factor is the constant 1.
    """
    if h < 1:
        raise ValueError(f"normalizing factor must be >= 1, got {h}")
    shared = s.intersection_size(t)
    if shared == 0:
        return 0.0
    if mode is MatchMode.SPANS_ONLY:
        factor = 1.0
    else:
        match = label_match or strict_label_match
        factor = match(s.technique, t.technique)
    return (shared / h) * factor


def _as_doc_map(annotations: AnnotationsLike) -> dict[str, AnnotationSet]:
    if isinstance(annotations, AnnotationSet):
        return {annotations.doc_id: annotations}
    out = {}
    for doc_id, ann in annotations.items():
        if ann.doc_id != doc_id:
            raise ValueError(
                f"annotation map key {doc_id!r} does not match set doc_id {ann.doc_id!r}"
            )
        out[doc_id] = ann
    return out


def _credit_sum(
    pred_map: Mapping[str, AnnotationSet],
    gold_map: Mapping[str, AnnotationSet],
    normalize_by_pred: bool,
    mode: MatchMode,
    label_match: LabelMatch | None,
) -> float:
    total = 0.0
    for doc_id, pred in pred_map.items():
        gold = gold_map.get(doc_id)
        if gold is None:
            continue
        for s in pred.fragments:
            for t in gold.fragments:
                h = s.length if normalize_by_pred else t.length
                total += overlap_credit(s, t, h, mode, label_match)
    return total


def _count(doc_map: Mapping[str, AnnotationSet]) -> int:
    return sum(len(a) for a in doc_map.values())


def precision(
    predictions: AnnotationsLike,
    gold: AnnotationsLike,
    mode: MatchMode = MatchMode.FULL_TASK,
    label_match: LabelMatch | None = None,
) -> float:
    """Summed pair credits normalized by predicted length and count; 0 if no predictions."""
    pred_map = _as_doc_map(predictions)
    gold_map = _as_doc_map(gold)
    n_pred = _count(pred_map)
    if n_pred == 0:
        return 0.0
    return _credit_sum(pred_map, gold_map, True, mode, label_match) / n_pred


def recall(
    predictions: AnnotationsLike,
    gold: AnnotationsLike,
    mode: MatchMode = MatchMode.FULL_TASK,
    label_match: LabelMatch | None = None,
) -> float:
    """Summed pair credits normalized by reference length and count; 0 if no references."""
    pred_map = _as_doc_map(predictions)
    gold_map = _as_doc_map(gold)
    n_gold = _count(gold_map)
    if n_gold == 0:
        return 0.0
    return _credit_sum(pred_map, gold_map, False, mode, label_match) / n_gold


def f1(
    predictions: AnnotationsLike,
    gold: AnnotationsLike,
    mode: MatchMode = MatchMode.FULL_TASK,
    per_technique: bool = False,
    label_match: LabelMatch | None = None,
) -> ScoreReport:
    """Full fragment-level score report for the given match mode.

    With ``per_technique`` the report carries one sub-report per
    technique, computed by restricting both sides to that technique
    before applying the same formulas.
    """
    pred_map = _as_doc_map(predictions)
    gold_map = _as_doc_map(gold)

    sub: dict[str, ScoreReport] | None = None
    if per_technique:
        sub = {}
        for technique in TECHNIQUES:
            p_t = {d: a.for_technique(technique) for d, a in pred_map.items()}
            g_t = {d: a.for_technique(technique) for d, a in gold_map.items()}
            sub[technique.identifier] = ScoreReport.from_precision_recall(
                precision(p_t, g_t, mode, label_match),
                recall(p_t, g_t, mode, label_match),
                _count(p_t),
                _count(g_t),
                mode=mode.value,
            )

    return ScoreReport.from_precision_recall(
        precision(pred_map, gold_map, mode, label_match),
        recall(pred_map, gold_map, mode, label_match),
        _count(pred_map),
        _count(gold_map),
        mode=mode.value,
        per_technique=sub,
    )


def slc_metrics(
    predictions: Sequence[int] | Sequence[bool],
    gold: Sequence[int] | Sequence[bool],
) -> ScoreReport:
    """Standard binary precision/recall/F1 with propaganda as the positive class.

    Both sequences must be aligned per sentence and equally long.
    """
    if len(predictions) != len(gold):
        raise ValueError(
            f"prediction/gold length mismatch: {len(predictions)} vs {len(gold)}"
        )
    tp = fp = fn = 0
    for p, g in zip(predictions, gold):
        p, g = bool(p), bool(g)
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif g and not p:
            fn += 1
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    return ScoreReport.from_precision_recall(
        prec, rec, predicted_count=tp + fp, gold_count=tp + fn, mode="slc"
    )
