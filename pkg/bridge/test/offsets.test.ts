import { describe, expect, it } from "vitest";

import { CodePointIndex, codePointLength, codePointSlice } from "../src/offsets.js";
import { tokenizeWithOffsets } from "../src/tokenizer.js";
import { segmentSentences } from "../src/corpus.js";

describe("code-point arithmetic", () => {
  it("counts astral characters once", () => {
    expect(codePointLength("ab")).toBe(2);
    expect(codePointLength("a\u{1F600}b")).toBe(3); // emoji is one code point
  });

  it("slices like a code-point string", () => {
    expect(codePointSlice("hello", 1, 4)).toBe("ell");
    expect(codePointSlice("a\u{1F600}b", 1, 2)).toBe("\u{1F600}");
    expect(codePointSlice("a\u{1F600}b", 2, 3)).toBe("b");
  });

  it("rejects out-of-range slices", () => {
    expect(() => codePointSlice("abc", 0, 4)).toThrow(RangeError);
  });

  it("maps utf-16 indices to code points", () => {
    const text = "x\u{1F600}yz";
    const index = new CodePointIndex(text);
    expect(index.toCodePoint(0)).toBe(0);
    expect(index.toCodePoint(1)).toBe(1); // emoji start (2 utf-16 units)
    expect(index.toCodePoint(3)).toBe(2); // y
    expect(index.toCodePoint(5)).toBe(4); // end sentinel
    expect(() => index.toCodePoint(2)).toThrow(RangeError); // inside surrogate pair
  });
});

describe("tokenizer", () => {
  it("splits words and punctuation with exact offsets", () => {
    const text = "Hello, world!";
    const tokens = tokenizeWithOffsets(text);
    expect(tokens.map((t) => t.text)).toEqual(["Hello", ",", "world", "!"]);
    for (const token of tokens) {
      expect(codePointSlice(text, token.begin, token.end)).toBe(token.text);
    }
  });

  it("applies the base offset", () => {
    const tokens = tokenizeWithOffsets("ab cd", 100);
    expect(tokens.map((t) => [t.begin, t.end])).toEqual([
      [100, 102],
      [103, 105],
    ]);
  });

  it("keeps astral offsets in code points", () => {
    const text = "go \u{1F600} now";
    const tokens = tokenizeWithOffsets(text);
    for (const token of tokens) {
      expect(codePointSlice(text, token.begin, token.end)).toBe(token.text);
    }
  });
});

describe("sentence segmentation", () => {
  it("skips zero-length lines and keeps offsets", () => {
    const spans = segmentSentences("abc\n\nde\n");
    expect(spans).toEqual([
      { begin: 0, end: 3, index: 0 },
      { begin: 5, end: 7, index: 1 },
    ]);
  });

  it("counts whitespace-only lines as sentences", () => {
    expect(segmentSentences("a\n  \nb").length).toBe(3);
  });

  it("keeps carriage returns inside sentences, matching the python loader", () => {
    expect(segmentSentences("ab\r\ncd ef\r\n")).toEqual([
      { begin: 0, end: 3, index: 0 },
      { begin: 4, end: 10, index: 1 },
    ]);
  });
});
