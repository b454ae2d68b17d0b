"""Acceptance suite.

Each test is one release criterion, run at its stated tolerance, and
prints one line: ``[ACCEPTANCE] <criterion>: PASS|FAIL|SKIP``. Run with
``pytest tests/test_acceptance.py -v -s`` to see the lines live.

The corpus-conditional criterion needs the publicly released
fine-grained propaganda corpus laid out as articles/, annotations/ and
splits/ under the directory named by PROPSPAN_CORPUS_DIR (default
``./corpus``); without it the criterion reports SKIP.
"""

import functools
import os
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import oracle_f1, oracle_precision, oracle_recall, random_annotation_set
from propspan.corpus import compare_stats, compute_stats, load_corpus_root, verify_split
from propspan.metrics import MatchMode, f1, overlap_credit, precision, recall, slc_metrics
from propspan.model import AnnotationSet, Fragment, Technique
from propspan.nn import (
    TrainingExample,
    TrainSettings,
    backward,
    batch_loss,
    build_model,
    forward,
    train_model,
)
from propspan.pipeline import (
    all_propaganda_baseline,
    build_examples,
    decode_predictions,
    predict_examples,
    score_predictions,
)
from propspan.embeddings import HashEmbeddings
from propspan.synthetic import make_separable_corpus

L = Technique.LOADED_LANGUAGE
M = Technique.NAME_CALLING_LABELING
FULL = MatchMode.FULL_TASK
SPANS = MatchMode.SPANS_ONLY


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except pytest.skip.Exception as exc:
                print(f"\n[ACCEPTANCE] {name}: SKIP ({exc})")
                raise
            except BaseException:
                print(f"\n[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"\n[ACCEPTANCE] {name}: PASS")
            return result

        return wrapper

    return decorate


def ann(doc_id, *triples):
    return AnnotationSet(doc_id, tuple(Fragment(b, e, t) for b, e, t in triples))


@criterion("metric correctness suite (< 10 s)")
def test_metric_correctness_suite():
    started = time.monotonic()

    # worked credit examples
    assert overlap_credit(Fragment(0, 10, L), Fragment(0, 10, L), 10) == 1.0
    assert overlap_credit(Fragment(5, 15, L), Fragment(0, 10, L), 10) == 0.5
    assert overlap_credit(Fragment(0, 10, L), Fragment(0, 10, M), 10, FULL) == 0.0
    assert overlap_credit(Fragment(0, 10, L), Fragment(0, 10, M), 10, SPANS) == 1.0

    # precision examples
    singleton = ann("d", (0, 10, L))
    assert precision(singleton, singleton) == 1.0
    assert precision(ann("d"), singleton) == 0.0
    assert precision(ann("d", (0, 30, L)), ann("d", (0, 10, L), (20, 30, L))) == (
        pytest.approx(2 / 3, abs=1e-12)
    )

    # recall examples
    assert recall(singleton, singleton) == 1.0
    assert recall(ann("d", (5, 15, L)), ann("d", (0, 10, L))) == 0.5
    assert recall(singleton, ann("d")) == 0.0

    # harmonic-mean examples
    from propspan.metrics import harmonic_mean

    assert harmonic_mean(0.5, 0.5) == 0.5
    assert harmonic_mean(1.0, 0.0) == 0.0

    # penalization: an extra poorly overlapping prediction lowers precision
    gold = ann("d", (20, 80, L))
    p_single = precision(ann("d", (50, 70, L)), gold)
    p_split = precision(ann("d", (10, 30, L), (50, 70, L)), gold)
    assert p_single == 1.0
    assert p_split == pytest.approx(0.75, abs=1e-12)
    assert p_split < p_single

    # sentence-level examples
    skewed = [1] * 2392 + [0] * 7608
    report = slc_metrics([1] * 10000, skewed)
    assert (report.precision, report.recall) == (pytest.approx(0.2392, abs=1e-12), 1.0)
    assert 100 * report.f1 == pytest.approx(38.61, abs=0.05)
    perfect = slc_metrics([0, 1, 1], [0, 1, 1])
    assert (perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0)
    inverted = slc_metrics([1, 0, 0], [0, 1, 1])
    assert (inverted.precision, inverted.recall, inverted.f1) == (0.0, 0.0, 0.0)

    # duality on at least 10^4 random span-set pairs, both match modes
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        pred = random_annotation_set(rng, "d")
        gold = random_annotation_set(rng, "d")
        for mode in (FULL, SPANS):
            assert abs(precision(pred, gold, mode) - recall(gold, pred, mode)) < 1e-12

    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"metric suite took {elapsed:.1f}s"


@criterion("brute-force oracle equivalence (10^3 cases, 1e-12)")
def test_bruteforce_oracle_equivalence():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        pred = {"d": random_annotation_set(rng, "d", max_fragments=6, doc_length=200)}
        gold = {"d": random_annotation_set(rng, "d", max_fragments=6, doc_length=200)}
        for mode, spans_only in ((FULL, False), (SPANS, True)):
            p = precision(pred, gold, mode)
            r = recall(pred, gold, mode)
            assert abs(p - oracle_precision(pred, gold, spans_only)) < 1e-12
            assert abs(r - oracle_recall(pred, gold, spans_only)) < 1e-12
            assert abs(f1(pred, gold, mode).f1 - oracle_f1(p, r)) < 1e-12


def _finite_difference_worst(model, batch, h=1e-5):
    _, grads = backward(model, batch)
    worst = 0.0
    for name, arr in model.parameters().items():
        flat = arr.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp = batch_loss(model, batch).total
            flat[i] = orig - h
            lm = batch_loss(model, batch).total
            flat[i] = orig
            fd = (lp - lm) / (2 * h)
            an = grads[name].ravel()[i]
            worst = max(worst, abs(fd - an) / max(abs(fd) + abs(an), 1e-3))
    return worst


@criterion("gradient checks: all modes x both gates, rel err < 1e-4")
def test_gradient_checks():
    checked = 0
    for mode in ("bert_single", "bert_joint", "bert_granularity", "mgn"):
        for gate in ("relu", "sigmoid"):
            done, seed = 0, 0
            while done < 3:
                assert seed < 25, "could not sample enough parameterizations"
                model = build_model(
                    mode, dim=4, gate_activation=gate, token_classes=6,
                    alpha=0.65, positive_weight=1.7, seed=1000 + seed,
                    init_scale=0.5,
                )
                rng = np.random.default_rng(900 + seed)
                batch = [
                    TrainingExample(
                        rng.normal(size=(n + 1, 4)),
                        int(rng.integers(2)),
                        rng.integers(0, 6, size=n),
                    )
                    for n in (3, 1, 4)
                ]
                seed += 1
                if mode == "mgn" and any(
                    abs(forward(model, ex.embeddings).gate_pre) < 1e-2 for ex in batch
                ):
                    continue  # resample away from the relu kink
                worst = _finite_difference_worst(model, batch)
                assert worst < 1e-4, f"{mode}/{gate}: worst rel err {worst:.2e}"
                done += 1
                checked += 1
    assert checked >= 20, f"only {checked} parameterizations checked"


@criterion("gate semantics: negative relu pre-activation shuts level 2 off")
def test_gate_semantics():
    model = build_model(
        "mgn", dim=5, gate_activation="relu", token_classes=19, seed=4, init_scale=0.4
    )
    model.gates[0].weight[:] = 0.0
    model.gates[0].bias[:] = -0.75  # pre-activation fixed below zero

    rng = np.random.default_rng(11)
    embeddings = rng.normal(size=(6, 5))
    fwd = forward(model, embeddings)
    assert fwd.gate_weight == 0.0
    assert np.all(fwd.token_outputs == 0.0)

    example = TrainingExample(embeddings, 1, rng.integers(0, 19, size=5))
    parts, grads = backward(model, [example])
    assert parts.token_loss == 0.0
    assert parts.masks == (0.0,)
    assert np.all(grads["g2.weight"] == 0.0)
    assert np.all(grads["g2.bias"] == 0.0)


@criterion("overfit: separable 20-sentence corpus to FLC F1 = 1.0 (< 60 s)")
def test_overfit_synthetic_corpus():
    started = time.monotonic()
    corpus = make_separable_corpus(n_sentences=20, seed=0)
    provider = HashEmbeddings(dimension=48)
    doc_ids = corpus.doc_ids()
    examples, alignments = build_examples(corpus, doc_ids, provider, max_tokens=210)
    labels = [ex.sentence_label for ex in examples]
    positive_weight = (len(labels) - sum(labels)) / max(1, sum(labels))
    model = build_model(
        "mgn", dim=48, gate_activation="sigmoid", alpha=0.1,
        positive_weight=positive_weight, seed=1,
    )

    def training_f1(m):
        token_preds, slc_preds = predict_examples(m, examples)
        decoded = decode_predictions(token_preds, alignments)
        return score_predictions(corpus, doc_ids, decoded, slc_preds)["flc_full"].f1

    settings = TrainSettings(
        learning_rate=0.05, weight_decay=0.01, batch_size=16,
        max_epochs=200, patience=200, warmup_proportion=0.1, target_score=1.0,
    )
    log = train_model(model, examples, settings, training_f1, np.random.default_rng(1))
    elapsed = time.monotonic() - started
    assert log.best_score == 1.0, f"best training FLC F1 {log.best_score:.3f}"
    assert log.best_epoch <= 200
    assert elapsed < 60.0, f"overfit took {elapsed:.1f}s"


CORPUS_DIR = Path(os.environ.get("PROPSPAN_CORPUS_DIR", "corpus"))


@criterion("released-corpus statistics, splits and trivial baseline")
def test_released_corpus_checks():
    if not (CORPUS_DIR / "articles").is_dir():
        pytest.skip(f"released corpus not present under {CORPUS_DIR}")
    import json
    from importlib import resources

    corpus = load_corpus_root(CORPUS_DIR)
    with resources.files("propspan.data").joinpath("expected_corpus_stats.json").open() as fh:
        expected_stats = json.load(fh)
    stats = compute_stats(corpus)
    problems = compare_stats(stats, expected_stats, length_tolerance=0.5)
    assert not problems, "\n".join(problems)

    with resources.files("propspan.data").joinpath("expected_split_counts.json").open() as fh:
        expected_split = json.load(fh)
    report = verify_split(corpus, expected_split)
    assert report.ok, "\n".join(report.mismatches)

    baseline = all_propaganda_baseline(corpus, "test")
    assert 100 * baseline.precision == pytest.approx(23.92, abs=0.05)
    assert baseline.recall == 1.0
    assert 100 * baseline.f1 == pytest.approx(38.61, abs=0.05)


@criterion("desk-scale statement and mode equivalence")
def test_desk_scale_statement_and_mode_equivalence():
    print(
        "\nNOTE: published benchmark scores for these tasks (fragment-level "
        "full-task F1 around 22.6, sentence-level F1 around 61.0) come from "
        "fine-tuning a large pretrained encoder end to end. This toolkit "
        "trains linear heads over frozen embedding providers at desk scale "
        "and does not reproduce those numbers; the behavioral property "
        "suite (exact gradients, gate semantics, and the gated/ungated "
        "equivalence below) stands in for them."
    )
    joint = build_model("bert_joint", dim=7, token_classes=19, seed=12, init_scale=0.3)
    gated = build_model(
        "mgn", dim=7, gate_activation="relu", token_classes=19, seed=12, init_scale=0.3
    )
    gated.gates[0].weight[:] = 0.0
    gated.gates[0].bias[:] = 1.0  # relu(1) == 1: gate frozen open
    rng = np.random.default_rng(5)
    for _ in range(25):
        embeddings = rng.normal(size=(int(rng.integers(2, 9)), 7))
        f_joint = forward(joint, embeddings)
        f_gated = forward(gated, embeddings)
        assert f_gated.gate_weight == 1.0
        np.testing.assert_array_equal(f_gated.token_outputs, f_joint.token_outputs)
        np.testing.assert_array_equal(f_gated.sentence_probs, f_joint.sentence_probs)
