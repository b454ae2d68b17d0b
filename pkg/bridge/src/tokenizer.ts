/**
 * Offset-preserving tokenizer: word characters cluster, everything
 * else that is not whitespace stands alone. Offsets are code points,
 * absolute within the document when a base offset is supplied.
 */

import { CodePointIndex } from "./offsets.js";

export interface TokenSpan {
  readonly begin: number;
  readonly end: number; // exclusive, code points
  readonly text: string;
}

const TOKEN_RE = /[\p{L}\p{M}\p{N}_]+|[^\s\p{L}\p{M}\p{N}_]/gu;

export function tokenizeWithOffsets(sentence: string, base = 0): TokenSpan[] {
  const index = new CodePointIndex(sentence);
  const tokens: TokenSpan[] = [];
  for (const match of sentence.matchAll(TOKEN_RE)) {
    const startUtf16 = match.index ?? 0;
    const begin = index.toCodePoint(startUtf16);
    const end = index.toCodePoint(startUtf16 + match[0].length);
    tokens.push({ begin: base + begin, end: base + end, text: match[0] });
  }
  return tokens;
}
