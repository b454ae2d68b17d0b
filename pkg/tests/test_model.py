import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propspan.model import (
    TECHNIQUES,
    TOKEN_CLASS_COUNT,
    AnnotationSet,
    Document,
    Fragment,
    SentenceSpan,
    Technique,
    UnknownTechniqueError,
    fragments_in_sentence,
    sentence_label,
)

L = Technique.LOADED_LANGUAGE


class TestTechniqueCatalog:
    def test_exactly_eighteen_variants(self):
        assert len(TECHNIQUES) == 18
        assert TOKEN_CLASS_COUNT == 19

    def test_identifier_bijection(self):
        identifiers = {t.identifier for t in TECHNIQUES}
        assert len(identifiers) == 18
        for t in TECHNIQUES:
            assert Technique.from_identifier(t.identifier) is t

    def test_class_indices_are_one_based_and_distinct(self):
        assert sorted(t.class_index for t in TECHNIQUES) == list(range(1, 19))

    def test_unknown_identifier_lists_valid_ones(self):
        with pytest.raises(UnknownTechniqueError) as exc:
            Technique.from_identifier("sarcasm")
        message = str(exc.value)
        for t in TECHNIQUES:
            assert t.identifier in message


class TestFragment:
    def test_needs_positive_length(self):
        with pytest.raises(ValueError):
            Fragment(5, 5, L)
        with pytest.raises(ValueError):
            Fragment(7, 3, L)
        with pytest.raises(ValueError):
            Fragment(-1, 4, L)

    def test_length(self):
        assert Fragment(3, 10, L).length == 7


class TestDocument:
    def test_newline_segmentation(self):
        doc = Document.from_text("d", "abc\n\nde\n")
        assert [(s.begin, s.end, s.index) for s in doc.sentences] == [
            (0, 3, 0),
            (5, 7, 1),
        ]

    def test_whitespace_only_line_is_a_sentence(self):
        doc = Document.from_text("d", "abc\n  \nde")
        assert len(doc.sentences) == 3

    def test_sentence_coverage_equals_non_newline_chars(self):
        text = "one line\n\nanother\nlast one  \n"
        doc = Document.from_text("d", text)
        covered = sum(s.end - s.begin for s in doc.sentences)
        assert covered == sum(1 for ch in text if ch != "\n")

    def test_custom_spans_must_cover_exactly(self):
        Document("d", "0123456789", (SentenceSpan(0, 4, 0), SentenceSpan(4, 10, 1)))
        with pytest.raises(ValueError):
            Document("d", "0123456789", (SentenceSpan(0, 4, 0),))
        with pytest.raises(ValueError):
            Document("d", "0123456789", (SentenceSpan(0, 6, 0), SentenceSpan(4, 10, 1)))

    def test_indices_contiguous(self):
        with pytest.raises(ValueError):
            Document("d", "ab\ncd", (SentenceSpan(0, 2, 0), SentenceSpan(3, 5, 2)))


class TestSentenceOps:
    def test_contained_fragment_is_positive(self, simple_doc):
        gold = AnnotationSet("doc1", (Fragment(5, 10, L),))
        assert sentence_label(simple_doc, gold, 0) is True

    def test_no_fragments_means_all_negative(self, simple_doc):
        gold = AnnotationSet("doc1", ())
        for s in simple_doc.sentences:
            assert sentence_label(simple_doc, gold, s.index) is False

    def test_straddling_fragment_labels_both_sentences(self):
        # adjacent sentence spans [0, 20) and [20, 40); fragment [18, 25)
        # shares characters with both (per-character overlap oracle)
        doc = Document(
            "d", "x" * 40, (SentenceSpan(0, 20, 0), SentenceSpan(20, 40, 1))
        )
        gold = AnnotationSet("d", (Fragment(18, 25, L),))
        assert sentence_label(doc, gold, 0) is True
        assert sentence_label(doc, gold, 1) is True
        assert fragments_in_sentence(doc, gold, 0) == [Fragment(18, 25, L)]
        assert fragments_in_sentence(doc, gold, 1) == [Fragment(18, 25, L)]

    def test_exact_sentence_span_fragment_returned(self, simple_doc):
        span = simple_doc.sentences[1]
        frag = Fragment(span.begin, span.end, L)
        gold = AnnotationSet("doc1", (frag,))
        assert fragments_in_sentence(simple_doc, gold, 1) == [frag]

    def test_disjoint_fragment_excluded(self, simple_doc):
        gold = AnnotationSet("doc1", (Fragment(0, 3, L),))
        assert fragments_in_sentence(simple_doc, gold, 1) == []

    def test_doc_id_mismatch_rejected(self, simple_doc):
        gold = AnnotationSet("other", (Fragment(0, 3, L),))
        with pytest.raises(ValueError):
            sentence_label(simple_doc, gold, 0)

    def test_bad_sentence_index_rejected(self, simple_doc):
        gold = AnnotationSet("doc1", ())
        with pytest.raises(IndexError):
            sentence_label(simple_doc, gold, 2)

    @given(
        frags=st.lists(
            st.tuples(st.integers(0, 43), st.integers(1, 20)), max_size=5
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_label_iff_fragments_nonempty(self, frags):
        doc = Document.from_text("doc1", "the quick brown fox aa\njumped over a lazy dog")
        fragments = tuple(
            Fragment(b, min(b + n, 45), L) for b, n in frags if b < 45
        )
        gold = AnnotationSet("doc1", fragments)
        for s in doc.sentences:
            assert sentence_label(doc, gold, s.index) == bool(
                fragments_in_sentence(doc, gold, s.index)
            )


class TestAnnotationSet:
    def test_duplicates_kept(self):
        dup = Fragment(0, 5, L)
        assert len(AnnotationSet("d", (dup, dup))) == 2

    def test_validate_against_bounds(self, simple_doc):
        AnnotationSet("doc1", (Fragment(0, 45, L),)).validate_against(simple_doc)
        with pytest.raises(ValueError):
            AnnotationSet("doc1", (Fragment(0, 46, L),)).validate_against(simple_doc)
