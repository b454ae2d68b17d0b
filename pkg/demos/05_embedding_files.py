"""The binary embedding-file bridge, from both ends.

Writes an embedding file for a small corpus with the in-package writer,
inspects it with the reader, and trains from it. The standalone
TypeScript exporter in bridge/ produces the same byte layout from real
article directories (``node dist/cli.js export --corpus DIR --out F``).
"""

import tempfile
from pathlib import Path

from propspan.embeddings import (
    EmbeddingFileProvider,
    HashEmbeddings,
    SentenceEmbedding,
    read_embedding_file,
    write_embedding_file,
)
from propspan.pipeline import ExperimentConfig, align_document, run_experiment
from propspan.synthetic import make_multi_article_corpus

##############################################################################
# An embedding file stores, per sentence: document id, sentence index,
# per-token character offsets, and one float32 vector per token plus a
# leading sentence-level vector. Build one for a synthetic corpus.

corpus = make_multi_article_corpus(n_articles=8, n_techniques=3, seed=11)
provider = HashEmbeddings(dimension=24)
records = []
for doc_id in corpus.doc_ids():
    doc = corpus.documents[doc_id]
    alignment = align_document(doc)
    for span in doc.sentences:
        spans = alignment.sentence_tokens[span.index]
        tokens = [doc.text[b:e] for b, e in spans]
        records.append(
            SentenceEmbedding(
                doc_id=doc_id,
                sentence_index=span.index,
                token_offsets=spans,
                matrix=provider.encode(tokens),
            )
        )

workdir = Path(tempfile.mkdtemp(prefix="propspan-emb-"))
path = workdir / "corpus.emb"
write_embedding_file(path, "demo-hash-24", 24, records)
print("wrote", path, f"({path.stat().st_size} bytes, {len(records)} sentences)")

##############################################################################
# The reader validates everything structurally: magic, version, counts
# against the payload, finite values, non-empty token spans. Header
# fields round-trip exactly.

archive = read_embedding_file(path)
print("encoder:", archive.encoder_name, "| dimension:", archive.dimension)
first_key = sorted(archive.records)[0]
first = archive.records[first_key]
print("first record:", first.doc_id, "sentence", first.sentence_index,
      "|", len(first.token_offsets), "tokens, matrix", first.matrix.shape)

# offsets slice the original text back into tokens
doc = corpus.documents[first.doc_id]
print("re-sliced tokens:", [doc.text[b:e] for b, e in first.token_offsets][:5], "...")

##############################################################################
# Training consumes the file through the config: embedding = <path>.
# Token offsets then come from the file, not from the tokenizer, so an
# external exporter fully controls the alignment.

config = ExperimentConfig(
    mode="bert_joint", alpha=0.5, seeds=(1,), learning_rate=0.02,
    weight_decay=0.0, batch_size=8, max_epochs=20, patience=20,
    embedding=str(path), monitor="flc_full",
)
result = run_experiment(config, corpus)
mean = result.mean["flc_full"]
print("\ntrained from the file: P {:.2f} R {:.2f} F1 {:.2f}".format(
    100 * mean["precision"], 100 * mean["recall"], 100 * mean["f1"]))

##############################################################################
# Corrupt files never load: flip one byte in the magic and try.

broken = workdir / "broken.emb"
data = bytearray(path.read_bytes())
data[0] ^= 0xFF
broken.write_bytes(bytes(data))
try:
    read_embedding_file(broken)
except Exception as error:
    print("corrupt file rejected:", error)

provider = EmbeddingFileProvider.from_file(path)
print("provider lookup:", provider.get(first.doc_id, first.sentence_index) is not None)
