"""Core domain types for span-annotated news articles.

A document is a plain sequence of characters segmented into
newline-delimited sentences. Annotations are character intervals
(begin inclusive, end exclusive, zero-based) labeled with one of the
eighteen techniques in the catalog. Offsets always count Unicode code
points, never bytes, and they index the raw article text including any
line-break characters.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping


class Technique(enum.Enum):
    """The eighteen-technique catalog, in canonical order.

    The enum value is the stable identifier used in annotation files;
    the mapping between identifiers and variants is a bijection.
    """

    LOADED_LANGUAGE = "loaded_language"
    NAME_CALLING_LABELING = "name_calling_labeling"
    REPETITION = "repetition"
    EXAGGERATION_MINIMIZATION = "exaggeration_minimization"
    DOUBT = "doubt"
    APPEAL_TO_FEAR_PREJUDICE = "appeal_to_fear_prejudice"
    FLAG_WAVING = "flag_waving"
    CAUSAL_OVERSIMPLIFICATION = "causal_oversimplification"
    SLOGANS = "slogans"
    APPEAL_TO_AUTHORITY = "appeal_to_authority"
    BLACK_AND_WHITE_FALLACY = "black_and_white_fallacy"
    THOUGHT_TERMINATING_CLICHES = "thought_terminating_cliches"
    WHATABOUTISM = "whataboutism"
    REDUCTIO_AD_HITLERUM = "reductio_ad_hitlerum"
    RED_HERRING = "red_herring"
    BANDWAGON = "bandwagon"
    OBFUSCATION_INTENTIONAL_VAGUENESS_CONFUSION = "obfuscation_intentional_vagueness_confusion"
    STRAW_MAN = "straw_man"

    @property
    def identifier(self) -> str:
        return self.value

    @property
    def class_index(self) -> int:
        """1-based position in the catalog; class 0 is reserved for 'none'."""
        return _CLASS_INDEX[self]

    @classmethod
    def from_identifier(cls, identifier: str) -> "Technique":
        try:
            return cls(identifier)
        except ValueError:
            raise UnknownTechniqueError(identifier) from None


TECHNIQUES: tuple[Technique, ...] = tuple(Technique)
_CLASS_INDEX: Mapping[Technique, int] = {t: i + 1 for i, t in enumerate(TECHNIQUES)}

#: Class id of the "no technique" token label in the 19-way scheme.
NONE_CLASS = 0
#: Token-level class count: the 18 techniques plus the none class.
TOKEN_CLASS_COUNT = len(TECHNIQUES) + 1


class UnknownTechniqueError(ValueError):
    """Raised for an identifier outside the 18-entry catalog."""

    def __init__(self, identifier: str):
        self.identifier = identifier
        valid = ", ".join(t.identifier for t in TECHNIQUES)
        super().__init__(
            f"unknown technique identifier {identifier!r}; valid identifiers: {valid}"
        )


@dataclass(frozen=True, order=True)
class Fragment:
    """A labeled character interval: [begin, end) with a technique."""

    begin: int
    end: int
    technique: Technique

    def __post_init__(self) -> None:
        if not (0 <= self.begin < self.end):
            raise ValueError(
                f"invalid fragment offsets [{self.begin}, {self.end}): "
                "need 0 <= begin < end"
            )

    @property
    def length(self) -> int:
        return self.end - self.begin

    def intersection_size(self, other: "Fragment") -> int:
        """Number of character positions shared with ``other``."""
        return max(0, min(self.end, other.end) - max(self.begin, other.begin))

    def overlaps_interval(self, begin: int, end: int) -> bool:
        return min(self.end, end) - max(self.begin, begin) >= 1


@dataclass(frozen=True)
class SentenceSpan:
    """One sentence as a character interval plus its ordinal index."""

    begin: int
    end: int
    index: int

    def __post_init__(self) -> None:
        if self.begin >= self.end:
            raise ValueError(f"sentence span [{self.begin}, {self.end}) is empty")
        if self.index < 0:
            raise ValueError("sentence index must be nonnegative")


@dataclass(frozen=True)
class Document:
    """An article: id, full text, and its ordered sentence spans.

    Sentence spans must be non-overlapping, ordered, contiguously
    indexed from 0, and must jointly cover exactly the non-newline
    characters of the text.
    """

    doc_id: str
    text: str
    sentences: tuple[SentenceSpan, ...]

    def __post_init__(self) -> None:
        covered: set[int] = set()
        prev_end = -1
        for i, s in enumerate(self.sentences):
            if s.index != i:
                raise ValueError(
                    f"doc {self.doc_id}: sentence indices must be contiguous from 0"
                )
            if s.begin < prev_end:
                raise ValueError(f"doc {self.doc_id}: sentence spans overlap or are unordered")
            if s.end > len(self.text):
                raise ValueError(f"doc {self.doc_id}: sentence span exceeds text length")
            covered.update(range(s.begin, s.end))
            prev_end = s.end
        expected = {i for i, ch in enumerate(self.text) if ch != "\n"}
        if covered != expected:
            raise ValueError(
                f"doc {self.doc_id}: sentence spans must cover exactly the "
                "non-newline characters"
            )

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> "Document":
        """Segment ``text`` into sentences at newlines.

        Every non-empty line (including whitespace-only lines) is one
        sentence; zero-length lines are skipped and do not receive a
        sentence index.
        """
        spans = []
        pos = 0
        for line in text.split("\n"):
            if line:
                spans.append(SentenceSpan(pos, pos + len(line), len(spans)))
            pos += len(line) + 1
        return cls(doc_id=doc_id, text=text, sentences=tuple(spans))

    def __len__(self) -> int:
        return len(self.text)

    def sentence(self, index: int) -> SentenceSpan:
        if not 0 <= index < len(self.sentences):
            raise IndexError(
                f"doc {self.doc_id}: sentence index {index} out of range "
                f"(have {len(self.sentences)})"
            )
        return self.sentences[index]

    def sentence_text(self, index: int) -> str:
        s = self.sentence(index)
        return self.text[s.begin:s.end]


@dataclass(frozen=True)
class AnnotationSet:
    """All fragments of one document, gold or predicted.

    Fragments form a multiset: overlaps and exact duplicates are kept
    as distinct members because the scoring formulas divide by set
    cardinalities.
    """

    doc_id: str
    fragments: tuple[Fragment, ...]

    def __len__(self) -> int:
        return len(self.fragments)

    def __iter__(self) -> Iterator[Fragment]:
        return iter(self.fragments)

    def for_technique(self, technique: Technique) -> "AnnotationSet":
        return AnnotationSet(
            self.doc_id,
            tuple(f for f in self.fragments if f.technique is technique),
        )

    def validate_against(self, doc: Document) -> None:
        """Check fragment containment in ``doc``; raise ValueError otherwise."""
        if doc.doc_id != self.doc_id:
            raise ValueError(
                f"annotation set for doc {self.doc_id!r} does not match doc {doc.doc_id!r}"
            )
        for f in self.fragments:
            if f.end > len(doc.text):
                raise ValueError(
                    f"doc {self.doc_id}: fragment [{f.begin}, {f.end}) exceeds "
                    f"document length {len(doc.text)}"
                )


def _check_same_doc(doc: Document, ann: AnnotationSet) -> None:
    if doc.doc_id != ann.doc_id:
        raise ValueError(
            f"annotation set for doc {ann.doc_id!r} cannot be applied to doc {doc.doc_id!r}"
        )


def fragments_in_sentence(
    doc: Document, ann: AnnotationSet, sentence_index: int
) -> list[Fragment]:
    """Fragments overlapping the sentence by at least one character.

    Original character offsets are preserved; a fragment straddling a
    sentence boundary is reported for every sentence it touches.
    """
    _check_same_doc(doc, ann)
    span = doc.sentence(sentence_index)
    return [f for f in ann.fragments if f.overlaps_interval(span.begin, span.end)]


def sentence_label(doc: Document, gold: AnnotationSet, sentence_index: int) -> bool:
    """True iff at least one gold fragment overlaps the sentence by >= 1 char."""
    return bool(fragments_in_sentence(doc, gold, sentence_index))
