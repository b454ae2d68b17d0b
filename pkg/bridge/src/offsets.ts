/**
 * Code-point offset arithmetic.
 *
 * The annotation and embedding formats count character offsets in
 * Unicode code points, while JavaScript string indices count UTF-16
 * code units. These helpers convert between the two so exported token
 * offsets line up with what Python-side consumers compute.
 */

/** Number of code points in a string. */
export function codePointLength(text: string): number {
  let n = 0;
  for (let i = 0; i < text.length; ) {
    i += codeUnitWidth(text, i);
    n += 1;
  }
  return n;
}

function codeUnitWidth(text: string, utf16Index: number): number {
  const code = text.codePointAt(utf16Index);
  if (code === undefined) {
    throw new RangeError(`index ${utf16Index} out of range`);
  }
  return code > 0xffff ? 2 : 1;
}

/**
 * Map from UTF-16 index to code-point index for one string.
 *
 * Built once per sentence and queried per token boundary; boundaries
 * produced by a /u-flagged regex always fall on code-point starts (or
 * the string end), so lookups never split a surrogate pair.
 */
export class CodePointIndex {
  private readonly utf16Starts: number[];

  constructor(text: string) {
    this.utf16Starts = [];
    for (let i = 0; i < text.length; i += codeUnitWidth(text, i)) {
      this.utf16Starts.push(i);
    }
    this.utf16Starts.push(text.length); // sentinel for end offsets
  }

  toCodePoint(utf16Index: number): number {
    // binary search over code-point start positions
    let lo = 0;
    let hi = this.utf16Starts.length - 1;
    while (lo < hi) {
      const mid = (lo + hi) >> 1;
      if (this.utf16Starts[mid] < utf16Index) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (this.utf16Starts[lo] !== utf16Index) {
      throw new RangeError(`UTF-16 index ${utf16Index} is not a code-point boundary`);
    }
    return lo;
  }
}

/** Slice by code-point offsets (end-exclusive), like Python's text[b:e]. */
export function codePointSlice(text: string, begin: number, end: number): string {
  if (begin < 0 || end < begin) {
    throw new RangeError(`invalid code-point slice [${begin}, ${end})`);
  }
  let out = "";
  let cp = 0;
  for (const ch of text) {
    if (cp >= end) break;
    if (cp >= begin) out += ch;
    cp += 1;
  }
  if (end > cp) {
    throw new RangeError(`slice end ${end} beyond text length ${cp}`);
  }
  return out;
}
