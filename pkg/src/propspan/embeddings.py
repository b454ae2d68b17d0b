"""Token embedding providers.

A provider turns one tokenized sentence into a matrix with one row per
token plus a leading sentence-level row (row 0), all of a fixed
dimension and finite. Two implementations ship:

* :class:`HashEmbeddings` derives a deterministic pseudo-random vector
  from each token string; the sentence row is the mean of the token
  rows. It exists so the classifier stack can be exercised and tested
  without any pretrained encoder.
* :class:`EmbeddingFileProvider` serves vectors exported by an external
  encoder through the binary embedding-file format below.

Embedding-file layout (all integers little-endian uint32, vectors
little-endian float32):

    magic   b"EMBF"
    u32     format version (currently 1)
    u32     dimension (> 0)
    u32     sentence record count
    u32     encoder name length, followed by that many UTF-8 bytes
    u32     skipped sentence count (alignment failures at export)
    u32     truncated sentence count (token lists cut at max length)
    then per sentence record:
        u32     doc_id length, followed by that many UTF-8 bytes
        u32     sentence index
        u32     token count
        2*u32   per token: begin, end (document character offsets)
        f32[..] (token count + 1) rows of `dimension` floats,
                row 0 = sentence-level vector
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

EMBEDDING_FILE_MAGIC = b"EMBF"
EMBEDDING_FILE_VERSION = 1


class EmbeddingFormatError(ValueError):
    """Raised for a malformed embedding file."""


def _validate_matrix(matrix: np.ndarray, dimension: int, n_tokens: int) -> np.ndarray:
    if matrix.shape != (n_tokens + 1, dimension):
        raise ValueError(
            f"embedding matrix must be ({n_tokens + 1}, {dimension}), "
            f"got {matrix.shape}"
        )
    if not np.all(np.isfinite(matrix)):
        raise ValueError("embedding matrix contains non-finite values")
    return matrix


class HashEmbeddings:
    """Deterministic per-token vectors derived from the token string.

    The same token always maps to the same vector, across runs and
    platforms, which keeps synthetic training data linearly separable
    and experiments reproducible.
    """

    def __init__(self, dimension: int = 32, scale: float = 1.0):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.scale = scale
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            seed = int.from_bytes(digest, "little")
            rng = np.random.default_rng(seed)
            vec = rng.standard_normal(self.dimension) * self.scale
            self._cache[token] = vec
        return vec

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        """Matrix of shape (len(tokens) + 1, dimension); row 0 is the sentence row."""
        rows = np.zeros((len(tokens) + 1, self.dimension))
        for i, token in enumerate(tokens):
            rows[i + 1] = self._token_vector(token)
        if tokens:
            rows[0] = rows[1:].mean(axis=0)
        return _validate_matrix(rows, self.dimension, len(tokens))


@dataclass(frozen=True)
class SentenceEmbedding:
    """One exported sentence: token offsets plus the vector rows."""

    doc_id: str
    sentence_index: int
    token_offsets: tuple[tuple[int, int], ...]
    matrix: np.ndarray  # (token_count + 1, dimension)


@dataclass(frozen=True)
class EmbeddingArchive:
    """Parsed embedding file: header fields plus per-sentence records."""

    version: int
    encoder_name: str
    dimension: int
    skipped_sentences: int
    truncated_sentences: int
    records: Mapping[tuple[str, int], SentenceEmbedding]

    def get(self, doc_id: str, sentence_index: int) -> SentenceEmbedding | None:
        return self.records.get((doc_id, sentence_index))


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise EmbeddingFormatError(
                f"{self.path}: truncated file while reading {what} "
                f"(need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos})"
            )
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def string(self, what: str) -> str:
        length = self.u32(f"{what} length")
        raw = self.take(length, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise EmbeddingFormatError(f"{self.path}: {what} is not valid UTF-8") from None


def read_embedding_file(path: Path | str) -> EmbeddingArchive:
    """Parse and structurally validate an embedding file.

    Raises EmbeddingFormatError for any malformed content: wrong magic
    or version, zero dimension, offsets out of order, counts that do
    not match the payload, trailing bytes, or non-finite vectors.
    """
    path = Path(path)
    reader = _Reader(path.read_bytes(), path)

    magic = reader.take(4, "magic")
    if magic != EMBEDDING_FILE_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}")
    version = reader.u32("version")
    if version != EMBEDDING_FILE_VERSION:
        raise EmbeddingFormatError(f"{path}: unsupported format version {version}")
    dimension = reader.u32("dimension")
    if dimension == 0:
        raise EmbeddingFormatError(f"{path}: dimension must be positive")
    sentence_count = reader.u32("sentence count")
    encoder_name = reader.string("encoder name")
    skipped = reader.u32("skipped sentence count")
    truncated = reader.u32("truncated sentence count")

    records: dict[tuple[str, int], SentenceEmbedding] = {}
    for i in range(sentence_count):
        doc_id = reader.string(f"record {i} doc_id")
        sentence_index = reader.u32(f"record {i} sentence index")
        token_count = reader.u32(f"record {i} token count")
        offsets = []
        for t in range(token_count):
            begin = reader.u32(f"record {i} token {t} begin")
            end = reader.u32(f"record {i} token {t} end")
            if begin >= end:
                raise EmbeddingFormatError(
                    f"{path}: record {i} ({doc_id!r} sentence {sentence_index}) "
                    f"token {t} has empty span [{begin}, {end})"
                )
            offsets.append((begin, end))
        n_floats = (token_count + 1) * dimension
        raw = reader.take(4 * n_floats, f"record {i} vectors")
        matrix = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        matrix = matrix.reshape(token_count + 1, dimension)
        if not np.all(np.isfinite(matrix)):
            raise EmbeddingFormatError(
                f"{path}: record {i} ({doc_id!r} sentence {sentence_index}) "
                "contains non-finite vector values"
            )
        key = (doc_id, sentence_index)
        if key in records:
            raise EmbeddingFormatError(
                f"{path}: duplicate record for {doc_id!r} sentence {sentence_index}"
            )
        records[key] = SentenceEmbedding(
            doc_id=doc_id,
            sentence_index=sentence_index,
            token_offsets=tuple(offsets),
            matrix=matrix,
        )
    if reader.pos != len(reader.data):
        raise EmbeddingFormatError(
            f"{path}: {len(reader.data) - reader.pos} trailing bytes after "
            f"{sentence_count} records"
        )
    return EmbeddingArchive(
        version=version,
        encoder_name=encoder_name,
        dimension=dimension,
        skipped_sentences=skipped,
        truncated_sentences=truncated,
        records=records,
    )


def write_embedding_file(
    path: Path | str,
    encoder_name: str,
    dimension: int,
    records: Sequence[SentenceEmbedding],
    skipped_sentences: int = 0,
    truncated_sentences: int = 0,
) -> None:
    """Serialize records in the embedding-file layout (test/fixture helper)."""
    chunks = [
        EMBEDDING_FILE_MAGIC,
        struct.pack("<I", EMBEDDING_FILE_VERSION),
        struct.pack("<I", dimension),
        struct.pack("<I", len(records)),
    ]
    name = encoder_name.encode("utf-8")
    chunks.append(struct.pack("<I", len(name)))
    chunks.append(name)
    chunks.append(struct.pack("<I", skipped_sentences))
    chunks.append(struct.pack("<I", truncated_sentences))
    for rec in records:
        doc = rec.doc_id.encode("utf-8")
        chunks.append(struct.pack("<I", len(doc)))
        chunks.append(doc)
        chunks.append(struct.pack("<I", rec.sentence_index))
        chunks.append(struct.pack("<I", len(rec.token_offsets)))
        for begin, end in rec.token_offsets:
            chunks.append(struct.pack("<II", begin, end))
        matrix = np.asarray(rec.matrix, dtype="<f4")
        _validate_matrix(matrix, dimension, len(rec.token_offsets))
        chunks.append(matrix.tobytes())
    Path(path).write_bytes(b"".join(chunks))


class EmbeddingFileProvider:
    """Provider view over an :class:`EmbeddingArchive`.

    Sentences absent from the archive (skipped at export) return None;
    callers decide whether to drop them or fail.
    """

    def __init__(self, archive: EmbeddingArchive):
        self.archive = archive
        self.dimension = archive.dimension

    @classmethod
    def from_file(cls, path: Path | str) -> "EmbeddingFileProvider":
        return cls(read_embedding_file(path))

    def get(self, doc_id: str, sentence_index: int) -> SentenceEmbedding | None:
        return self.archive.get(doc_id, sentence_index)
