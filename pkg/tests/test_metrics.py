"""Scoring tests.

Worked expected values were computed first with the per-character
brute-force oracle in conftest.py and then frozen here.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    ann,
    oracle_f1,
    oracle_precision,
    oracle_recall,
    random_annotation_set,
)
from propspan.metrics import (
    MatchMode,
    f1,
    harmonic_mean,
    overlap_credit,
    precision,
    recall,
    slc_metrics,
)
from propspan.model import AnnotationSet, Fragment, Technique

L = Technique.LOADED_LANGUAGE
M = Technique.NAME_CALLING_LABELING
FULL = MatchMode.FULL_TASK
SPANS = MatchMode.SPANS_ONLY


class TestOverlapCredit:
    def test_identical_fragments(self):
        s = t = Fragment(0, 10, L)
        assert overlap_credit(s, t, 10) == 1.0

    def test_half_overlap(self):
        # oracle: shared positions of [5,15) and [0,10) = {5..9}, 5/10
        assert overlap_credit(Fragment(5, 15, L), Fragment(0, 10, L), 10) == 0.5

    def test_label_agreement_factor(self):
        s, t = Fragment(0, 10, L), Fragment(0, 10, M)
        assert overlap_credit(s, t, 10, FULL) == 0.0
        assert overlap_credit(s, t, 10, SPANS) == 1.0

    def test_rejects_degenerate_normalizer(self):
        with pytest.raises(ValueError):
            overlap_credit(Fragment(0, 1, L), Fragment(0, 1, L), 0)

    def test_custom_label_match_hook(self):
        s, t = Fragment(0, 10, L), Fragment(0, 10, M)
        half_credit = lambda a, b: 1.0 if a is b else 0.5
        assert overlap_credit(s, t, 10, FULL, label_match=half_credit) == 0.5


class TestPrecisionRecall:
    def test_exact_match_is_one(self):
        s = ann("d", (0, 10, L))
        assert precision(s, s) == 1.0
        assert recall(s, s) == 1.0

    def test_empty_predictions_zero(self):
        assert precision(ann("d"), ann("d", (0, 10, L))) == 0.0

    def test_empty_gold_zero_recall(self):
        assert recall(ann("d", (0, 10, L)), ann("d")) == 0.0

    def test_one_prediction_covering_two_gold(self):
        # oracle: (10 + 10) / 30 = 0.6667
        pred = ann("d", (0, 30, L))
        gold = ann("d", (0, 10, L), (20, 30, L))
        assert precision(pred, gold) == pytest.approx(2 / 3, abs=1e-12)

    def test_recall_half_overlap(self):
        # oracle: 5 / 10
        assert recall(ann("d", (5, 15, L)), ann("d", (0, 10, L))) == 0.5

    def test_cross_document_pairs_earn_nothing(self):
        pred = {"a": ann("a", (0, 10, L))}
        gold = {"b": ann("b", (0, 10, L))}
        assert precision(pred, gold) == 0.0
        assert recall(pred, gold) == 0.0

    def test_micro_average_over_documents(self):
        pred = {"a": ann("a", (0, 10, L)), "b": ann("b", (0, 10, L))}
        gold = {"a": ann("a", (0, 10, L)), "b": ann("b", (5, 15, L))}
        # oracle: (1.0 + 0.5) / 2 both ways
        assert precision(pred, gold) == pytest.approx(0.75, abs=1e-12)
        assert recall(pred, gold) == pytest.approx(0.75, abs=1e-12)


class TestF1Report:
    def test_harmonic_mean_values(self):
        assert harmonic_mean(0.5, 0.5) == 0.5
        assert harmonic_mean(1.0, 0.0) == 0.0
        assert harmonic_mean(0.0, 1.0) == 0.0

    def test_report_fields(self):
        pred = ann("d", (0, 10, L))
        gold = ann("d", (0, 10, L), (20, 30, M))
        report = f1(pred, gold, FULL)
        assert report.predicted_count == 1
        assert report.gold_count == 2
        assert report.f1 == harmonic_mean(report.precision, report.recall)

    def test_penalization_of_extra_poor_prediction(self):
        # longer reference [20, 80); one exact-ish prediction vs the same
        # plus a poorly overlapping one: precision must strictly drop
        gold = ann("d", (20, 80, L))
        good_only = ann("d", (50, 70, L))
        with_extra = ann("d", (10, 30, L), (50, 70, L))
        p_good = precision(good_only, gold)
        p_extra = precision(with_extra, gold)
        assert p_good == 1.0  # oracle value
        assert p_extra == pytest.approx(0.75, abs=1e-12)  # oracle value
        assert p_extra < p_good

    def test_per_technique_restricts_both_sides(self):
        pred = {"d": ann("d", (0, 10, L), (20, 30, M))}
        gold = {"d": ann("d", (0, 10, L), (40, 50, M))}
        report = f1(pred, gold, FULL, per_technique=True)
        assert report.per_technique[L.identifier].f1 == 1.0
        assert report.per_technique[M.identifier].f1 == 0.0
        assert report.per_technique[M.identifier].predicted_count == 1

    def test_overlapping_gold_can_exceed_one_and_is_flagged(self):
        pred = ann("d", (0, 10, L))
        gold = ann("d", (0, 10, L), (0, 10, L))
        report = f1(pred, gold)
        assert report.precision == 2.0
        assert report.exceeds_unit_range

    def test_as_dict_round_trip_keys(self):
        report = f1(ann("d", (0, 10, L)), ann("d", (0, 10, L)), per_technique=True)
        payload = report.as_dict()
        assert set(payload) >= {
            "precision", "recall", "f1", "predicted_count", "gold_count",
            "mode", "exceeds_unit_range", "per_technique",
        }


def _random_pair(rng, same_doc=True):
    pred = random_annotation_set(rng, "d")
    gold = random_annotation_set(rng, "d")
    return pred, gold


class TestProperties:
    def test_duality_precision_equals_swapped_recall(self):
        rng = np.random.default_rng(42)
        for _ in range(2000):
            pred, gold = _random_pair(rng)
            for mode in (FULL, SPANS):
                assert abs(precision(pred, gold, mode) - recall(gold, pred, mode)) < 1e-12

    def test_recall_monotone_under_added_correct_prediction(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            pred = random_annotation_set(rng, "d")
            gold = random_annotation_set(rng, "d", allow_empty=False)
            base = recall(pred, gold)
            target = gold.fragments[0]
            grown = AnnotationSet("d", pred.fragments + (target,))
            assert recall(grown, gold) >= base

    def test_spans_only_at_least_full_task(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            pred, gold = _random_pair(rng)
            assert precision(pred, gold, SPANS) >= precision(pred, gold, FULL)
            assert recall(pred, gold, SPANS) >= recall(pred, gold, FULL)
            assert f1(pred, gold, SPANS).f1 >= f1(pred, gold, FULL).f1 - 1e-12

    def test_shift_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            pred, gold = _random_pair(rng)
            shift = int(rng.integers(1, 1000))
            shifted_pred = AnnotationSet(
                "d", tuple(Fragment(f.begin + shift, f.end + shift, f.technique) for f in pred)
            )
            shifted_gold = AnnotationSet(
                "d", tuple(Fragment(f.begin + shift, f.end + shift, f.technique) for f in gold)
            )
            for mode in (FULL, SPANS):
                assert precision(pred, gold, mode) == pytest.approx(
                    precision(shifted_pred, shifted_gold, mode), abs=1e-12
                )
                assert recall(pred, gold, mode) == pytest.approx(
                    recall(shifted_pred, shifted_gold, mode), abs=1e-12
                )

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_perfect_match_scores_one_for_disjoint_same_label_sets(self, data):
        # build non-overlapping fragments per technique so self-credit is exact
        n = data.draw(st.integers(1, 5))
        fragments = []
        cursor = 0
        for i in range(n):
            gap = data.draw(st.integers(0, 3))
            length = data.draw(st.integers(1, 9))
            technique = data.draw(st.sampled_from([L, M]))
            fragments.append(Fragment(cursor + gap, cursor + gap + length, technique))
            cursor += gap + length
        s = AnnotationSet("d", tuple(fragments))
        report = f1(s, s, FULL)
        assert report.precision == pytest.approx(1.0, abs=1e-12)
        assert report.recall == pytest.approx(1.0, abs=1e-12)
        assert report.f1 == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_spans_score_zero(self):
        pred = ann("d", (0, 10, L))
        gold = ann("d", (10, 20, L))
        report = f1(pred, gold, SPANS)
        assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)

    def test_matches_bruteforce_oracle_on_random_sets(self):
        rng = np.random.default_rng(123)
        for _ in range(250):
            pred = {"d": random_annotation_set(rng, "d")}
            gold = {"d": random_annotation_set(rng, "d")}
            for mode, spans_only in ((FULL, False), (SPANS, True)):
                p, r = precision(pred, gold, mode), recall(pred, gold, mode)
                assert abs(p - oracle_precision(pred, gold, spans_only)) < 1e-12
                assert abs(r - oracle_recall(pred, gold, spans_only)) < 1e-12
                assert abs(f1(pred, gold, mode).f1 - oracle_f1(p, r)) < 1e-12


class TestSlcMetrics:
    def test_all_positive_predictor_on_skewed_gold(self):
        # positive rate 2392/10000 = 23.92%; the constant positive
        # predictor then has P = 23.92, R = 100.0, F1 = 38.61 (percent)
        gold = [1] * 2392 + [0] * (10000 - 2392)
        report = slc_metrics([1] * 10000, gold)
        assert report.precision == pytest.approx(0.2392, abs=1e-12)
        assert report.recall == 1.0
        assert 100 * report.f1 == pytest.approx(38.61, abs=0.05)

    def test_perfect_predictions(self):
        gold = [0, 1, 1, 0, 1]
        report = slc_metrics(gold, gold)
        assert (report.precision, report.recall, report.f1) == (1.0, 1.0, 1.0)

    def test_inverted_predictions(self):
        gold = [0, 1, 1, 0]
        report = slc_metrics([1 - g for g in gold], gold)
        assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            slc_metrics([1, 0], [1])

    def test_degenerate_empty_sides(self):
        report = slc_metrics([0, 0], [0, 0])
        assert (report.precision, report.recall, report.f1) == (0.0, 0.0, 0.0)
