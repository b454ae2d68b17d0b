/**
 * Corpus export: tokenize every sentence, encode it, and emit one
 * embedding-file record per sentence in corpus order.
 *
 * Sentences whose token offsets fail the re-slice check are skipped
 * with a warning and tallied in the header; sentences cut at the token
 * budget are tallied as truncated. Re-running an export with the same
 * inputs and settings produces a byte-identical file.
 */

import { writeFileSync } from "node:fs";

import { Article, loadArticles } from "./corpus.js";
import { Encoder } from "./encoder.js";
import { EmbeddingFile, SentenceRecord, encodeEmbeddingFile } from "./format.js";
import { codePointSlice } from "./offsets.js";
import { tokenizeWithOffsets } from "./tokenizer.js";

export const DEFAULT_MAX_TOKENS = 210;

export interface ExportOptions {
  maxTokens?: number;
  /** Called once per skipped sentence; defaults to a stderr warning. */
  onSkip?: (docId: string, sentenceIndex: number, reason: string) => void;
}

export interface ExportResult {
  readonly file: Omit<EmbeddingFile, "version">;
  readonly sentenceCount: number;
}

export function exportArticles(
  articles: readonly Article[],
  encoder: Encoder,
  options: ExportOptions = {},
): ExportResult {
  const maxTokens = options.maxTokens ?? DEFAULT_MAX_TOKENS;
  const onSkip =
    options.onSkip ??
    ((docId: string, index: number, reason: string) => {
      process.stderr.write(`warning: skipping ${docId}#${index}: ${reason}\n`);
    });

  const records: SentenceRecord[] = [];
  let skipped = 0;
  let truncated = 0;
  let total = 0;

  for (const article of articles) {
    for (const span of article.sentences) {
      total += 1;
      const sentenceText = codePointSlice(article.text, span.begin, span.end);
      let tokens = tokenizeWithOffsets(sentenceText, span.begin);
      if (tokens.length > maxTokens) {
        tokens = tokens.slice(0, maxTokens);
        truncated += 1;
      }

      // detokenization check: every offset pair must slice back to its
      // token string from the raw article text
      const misaligned = tokens.find(
        (t) => codePointSlice(article.text, t.begin, t.end) !== t.text,
      );
      if (misaligned) {
        skipped += 1;
        onSkip(
          article.docId,
          span.index,
          `token at [${misaligned.begin}, ${misaligned.end}) does not re-slice to its text`,
        );
        continue;
      }

      const encoding = encoder.encode(tokens.map((t) => t.text));
      const vectors = new Float32Array((tokens.length + 1) * encoder.dimension);
      vectors.set(encoding.sentenceVector, 0);
      encoding.tokenVectors.forEach((vec, i) => {
        vectors.set(vec, (i + 1) * encoder.dimension);
      });
      records.push({
        docId: article.docId,
        sentenceIndex: span.index,
        tokenOffsets: tokens.map((t) => [t.begin, t.end] as const),
        vectors,
      });
    }
  }

  return {
    file: {
      encoderName: encoder.name,
      dimension: encoder.dimension,
      skippedSentences: skipped,
      truncatedSentences: truncated,
      records,
    },
    sentenceCount: total,
  };
}

export function exportCorpus(
  corpusDir: string,
  encoder: Encoder,
  outPath: string,
  options: ExportOptions = {},
): ExportResult {
  const result = exportArticles(loadArticles(corpusDir), encoder, options);
  writeFileSync(outPath, encodeEmbeddingFile(result.file));
  return result;
}
