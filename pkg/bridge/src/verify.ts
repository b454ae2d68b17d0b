/**
 * Embedding-file verification against its source corpus.
 *
 * Checks every invariant: structural soundness (delegated to the
 * decoder: magic, version, counts matching the payload, finite
 * vectors), constant dimension, token offsets lying inside their
 * sentence span and in order, and the re-slice check that every token
 * offset pair reproduces a token string from the article text. Each
 * violation is reported with its sentence coordinates.
 */

import { readFileSync } from "node:fs";

import { Article, loadArticles } from "./corpus.js";
import { EmbeddingFile, decodeEmbeddingFile } from "./format.js";
import { codePointSlice } from "./offsets.js";

export interface VerifyReport {
  readonly clean: boolean;
  readonly violations: readonly string[];
  readonly recordCount: number;
  readonly tokenCount: number;
  /** Fraction of tokens whose offsets re-slice to a plausible token string. */
  readonly resliceRate: number;
}

function isPlausibleToken(text: string): boolean {
  return text.length > 0 && text === text.trim();
}

export function verifyAgainstArticles(
  file: EmbeddingFile,
  articles: readonly Article[],
): VerifyReport {
  const byId = new Map(articles.map((a) => [a.docId, a]));
  const violations: string[] = [];
  let tokenCount = 0;
  let resliced = 0;

  for (const record of file.records) {
    const where = `${record.docId}#${record.sentenceIndex}`;
    const article = byId.get(record.docId);
    if (!article) {
      violations.push(`${where}: references an unknown document`);
      continue;
    }
    const span = article.sentences[record.sentenceIndex];
    if (!span || span.index !== record.sentenceIndex) {
      violations.push(`${where}: sentence index out of range`);
      continue;
    }
    let prevEnd = -1;
    for (const [begin, end] of record.tokenOffsets) {
      tokenCount += 1;
      if (begin < span.begin || end > span.end) {
        violations.push(
          `${where}: token [${begin}, ${end}) outside sentence span ` +
            `[${span.begin}, ${span.end})`,
        );
        continue;
      }
      if (begin < prevEnd) {
        violations.push(`${where}: token [${begin}, ${end}) overlaps its predecessor`);
      }
      prevEnd = end;
      if (isPlausibleToken(codePointSlice(article.text, begin, end))) {
        resliced += 1;
      } else {
        violations.push(`${where}: offsets [${begin}, ${end}) do not re-slice to a token`);
      }
    }
    const expected = (record.tokenOffsets.length + 1) * file.dimension;
    if (record.vectors.length !== expected) {
      violations.push(`${where}: vector payload does not match the declared counts`);
    }
  }

  return {
    clean: violations.length === 0,
    violations,
    recordCount: file.records.length,
    tokenCount,
    resliceRate: tokenCount === 0 ? 1.0 : resliced / tokenCount,
  };
}

export function verifyFile(filePath: string, corpusDir: string): VerifyReport {
  const file = decodeEmbeddingFile(readFileSync(filePath));
  return verifyAgainstArticles(file, loadArticles(corpusDir));
}
