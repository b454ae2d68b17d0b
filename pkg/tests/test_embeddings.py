import numpy as np
import pytest

from propspan.embeddings import (
    EmbeddingFileProvider,
    EmbeddingFormatError,
    HashEmbeddings,
    SentenceEmbedding,
    read_embedding_file,
    write_embedding_file,
)


class TestHashEmbeddings:
    def test_shape_row0_is_sentence_vector(self):
        provider = HashEmbeddings(dimension=16)
        matrix = provider.encode(["alpha", "beta", "gamma"])
        assert matrix.shape == (4, 16)
        np.testing.assert_allclose(matrix[0], matrix[1:].mean(axis=0))

    def test_deterministic_per_token(self):
        a = HashEmbeddings(dimension=8).encode(["word"])
        b = HashEmbeddings(dimension=8).encode(["word"])
        np.testing.assert_array_equal(a, b)

    def test_distinct_tokens_distinct_vectors(self):
        provider = HashEmbeddings(dimension=8)
        m = provider.encode(["aa", "ab"])
        assert not np.allclose(m[1], m[2])

    def test_finite_values(self):
        matrix = HashEmbeddings(dimension=8).encode(["x"] * 50)
        assert np.all(np.isfinite(matrix))

    def test_dimension_validated(self):
        with pytest.raises(ValueError):
            HashEmbeddings(dimension=0)


def sample_records(dim=4):
    rng = np.random.default_rng(0)
    return [
        SentenceEmbedding(
            doc_id="doc1",
            sentence_index=0,
            token_offsets=((0, 3), (4, 9)),
            matrix=rng.normal(size=(3, dim)),
        ),
        SentenceEmbedding(
            doc_id="doc2",
            sentence_index=5,
            token_offsets=((10, 12),),
            matrix=rng.normal(size=(2, dim)),
        ),
    ]


class TestEmbeddingFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "x.emb"
        write_embedding_file(
            path, "test-encoder", 4, sample_records(),
            skipped_sentences=2, truncated_sentences=1,
        )
        archive = read_embedding_file(path)
        assert archive.version == 1
        assert archive.encoder_name == "test-encoder"
        assert archive.dimension == 4
        assert archive.skipped_sentences == 2
        assert archive.truncated_sentences == 1
        assert set(archive.records) == {("doc1", 0), ("doc2", 5)}
        rec = archive.get("doc1", 0)
        assert rec.token_offsets == ((0, 3), (4, 9))
        # float32 precision round trip
        np.testing.assert_allclose(
            rec.matrix, sample_records()[0].matrix, atol=1e-6
        )

    def test_provider_lookup(self, tmp_path):
        path = tmp_path / "x.emb"
        write_embedding_file(path, "enc", 4, sample_records())
        provider = EmbeddingFileProvider.from_file(path)
        assert provider.dimension == 4
        assert provider.get("doc2", 5) is not None
        assert provider.get("doc2", 6) is None

    def test_empty_file_valid(self, tmp_path):
        path = tmp_path / "x.emb"
        write_embedding_file(path, "enc", 3, [])
        assert read_embedding_file(path).records == {}

    @pytest.mark.parametrize(
        "mutate, message",
        [
            (lambda d: b"XXXX" + d[4:], "magic"),
            (lambda d: d[:4] + (99).to_bytes(4, "little") + d[8:], "version"),
            (lambda d: d[:8] + (0).to_bytes(4, "little") + d[12:], "dimension"),
            (lambda d: d[:-7], "truncated"),
            (lambda d: d + b"\x00\x00", "trailing"),
        ],
    )
    def test_corrupt_files_rejected(self, tmp_path, mutate, message):
        path = tmp_path / "x.emb"
        write_embedding_file(path, "enc", 4, sample_records())
        path.write_bytes(mutate(path.read_bytes()))
        with pytest.raises(EmbeddingFormatError, match=message):
            read_embedding_file(path)

    def test_record_count_larger_than_payload_rejected(self, tmp_path):
        path = tmp_path / "x.emb"
        write_embedding_file(path, "enc", 4, sample_records())
        data = bytearray(path.read_bytes())
        data[12:16] = (3).to_bytes(4, "little")  # claims 3 records, has 2
        path.write_bytes(bytes(data))
        with pytest.raises(EmbeddingFormatError, match="truncated"):
            read_embedding_file(path)

    def test_empty_token_span_rejected(self, tmp_path):
        records = sample_records()
        bad = SentenceEmbedding(
            doc_id="doc3", sentence_index=0,
            token_offsets=((5, 5),), matrix=np.zeros((2, 4)),
        )
        path = tmp_path / "x.emb"
        write_embedding_file(path, "enc", 4, records + [bad])
        with pytest.raises(EmbeddingFormatError, match="empty span"):
            read_embedding_file(path)

    def test_non_finite_vectors_rejected(self, tmp_path):
        import struct

        path = tmp_path / "x.emb"
        write_embedding_file(path, "enc", 4, sample_records())
        data = bytearray(path.read_bytes())
        data[-4:] = struct.pack("<f", float("inf"))  # poison the last float
        path.write_bytes(bytes(data))
        with pytest.raises(EmbeddingFormatError, match="non-finite"):
            read_embedding_file(path)

    def test_duplicate_records_rejected(self, tmp_path):
        rec = sample_records()[0]
        path = tmp_path / "x.emb"
        write_embedding_file(path, "enc", 4, [rec, rec])
        with pytest.raises(EmbeddingFormatError, match="duplicate"):
            read_embedding_file(path)

    def test_byte_identical_rewrite(self, tmp_path):
        p1, p2 = tmp_path / "a.emb", tmp_path / "b.emb"
        write_embedding_file(p1, "enc", 4, sample_records())
        write_embedding_file(p2, "enc", 4, sample_records())
        assert p1.read_bytes() == p2.read_bytes()
