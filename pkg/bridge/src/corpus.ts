/**
 * Minimal read-only view of a propspan corpus: articles as plain text
 * plus newline-delimited sentence spans in code-point offsets.
 *
 * Matches the primary toolkit's conventions: every non-empty line
 * (including whitespace-only lines) is one sentence; zero-length lines
 * are skipped and carry no sentence index.
 */

import { readFileSync, readdirSync, statSync } from "node:fs";
import { join, basename } from "node:path";

import { codePointLength } from "./offsets.js";

export interface SentenceSpan {
  readonly begin: number; // code-point offset into the article text
  readonly end: number; // exclusive
  readonly index: number;
}

export interface Article {
  readonly docId: string;
  readonly text: string;
  readonly sentences: readonly SentenceSpan[];
}

export function segmentSentences(text: string): SentenceSpan[] {
  const spans: SentenceSpan[] = [];
  let pos = 0;
  for (const line of text.split("\n")) {
    const length = codePointLength(line);
    if (length > 0) {
      spans.push({ begin: pos, end: pos + length, index: spans.length });
    }
    pos += length + 1;
  }
  return spans;
}

export function loadArticle(path: string, docId: string): Article {
  const text = readFileSync(path, "utf-8");
  return { docId, text, sentences: segmentSentences(text) };
}

/** Articles of a corpus, sorted by doc id for deterministic output. */
export function loadArticles(corpusDir: string): Article[] {
  const articleDir = statSafe(join(corpusDir, "articles"))
    ? join(corpusDir, "articles")
    : corpusDir;
  const files = readdirSync(articleDir)
    .filter((name) => name.endsWith(".txt"))
    .sort();
  if (files.length === 0) {
    throw new Error(`no *.txt articles found in ${articleDir}`);
  }
  return files.map((name) =>
    loadArticle(join(articleDir, name), basename(name, ".txt")),
  );
}

function statSafe(path: string): boolean {
  try {
    return statSync(path).isDirectory();
  } catch {
    return false;
  }
}
