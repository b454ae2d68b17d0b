"""Labeled character spans and the partial-overlap scoring measure.

Walks through fragments, per-pair overlap credit, precision/recall/F1
in both match modes, and the property that predicting extra poorly
overlapping fragments lowers precision.
"""

from propspan.metrics import MatchMode, f1, overlap_credit, precision, recall
from propspan.model import AnnotationSet, Fragment, Technique

L = Technique.LOADED_LANGUAGE
N = Technique.NAME_CALLING_LABELING

##############################################################################
# A fragment is a half-open character interval plus a technique label.
# Offsets count Unicode code points in the article text.

gold = AnnotationSet("article1", (Fragment(20, 80, L),))
print("gold fragment:", gold.fragments[0])

##############################################################################
# Credit for one (predicted, reference) pair: shared characters divided
# by a normalizing length, times label agreement. Normalizing by the
# predicted length gives the precision credit; by the reference length,
# the recall credit.

pred = Fragment(50, 90, L)
print("precision credit:", overlap_credit(pred, gold.fragments[0], h=pred.length))
print("recall credit:   ", overlap_credit(pred, gold.fragments[0], h=gold.fragments[0].length))

# a wrong label earns nothing in full-task mode, full credit in spans mode
wrong_label = Fragment(20, 80, N)
print("wrong label, full task: ", overlap_credit(wrong_label, gold.fragments[0], 60))
print("wrong label, spans only:",
      overlap_credit(wrong_label, gold.fragments[0], 60, MatchMode.SPANS_ONLY))

##############################################################################
# Precision divides summed credits by the number of predictions, recall
# by the number of references, so over- and under-predicting both cost.
# One prediction with perfect overlap scores 1.0; adding a second,
# poorly overlapping prediction drags precision down to 0.75.

only_good = AnnotationSet("article1", (Fragment(50, 70, L),))
with_extra = AnnotationSet("article1", (Fragment(10, 30, L), Fragment(50, 70, L)))
print("\nP with one well-placed prediction:  ", precision(only_good, gold))
print("P after adding a poorly placed one:", precision(with_extra, gold))
print("R of the two-prediction set:        ", recall(with_extra, gold))

##############################################################################
# The full report combines both into the harmonic-mean F1 and can break
# the numbers down per technique.

report = f1(with_extra, gold, MatchMode.FULL_TASK, per_technique=True)
print("\nfull-task report: P {:.4f} R {:.4f} F1 {:.4f} (|S|={}, |T|={})".format(
    report.precision, report.recall, report.f1,
    report.predicted_count, report.gold_count,
))
print("loaded-language sub-report F1:",
      round(report.per_technique[L.identifier].f1, 4))

##############################################################################
# Scores are never clamped: a reference side containing overlapping
# same-label fragments can push precision above 1, and the report
# flags that instead of silently changing the formula.

overlapping_gold = AnnotationSet("article1", (Fragment(0, 10, L), Fragment(0, 10, L)))
flagged = f1(AnnotationSet("article1", (Fragment(0, 10, L),)), overlapping_gold)
print("\noverlapping gold: precision", flagged.precision,
      "flagged:", flagged.exceeds_unit_range)
