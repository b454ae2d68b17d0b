/**
 * Token encoders behind a small registry.
 *
 * The shipped encoder derives a deterministic pseudo-random base
 * vector from each token string (SHA-256 seeded generator, integer
 * arithmetic only, so identical across platforms and runs) and mixes
 * in the immediate neighbors for a light contextual flavor. The
 * sentence-level vector is the mean of the contextualized token
 * vectors.
 *
 * Heavyweight pretrained encoders do not ship with this package; any
 * encoder represented here must be available locally. Unknown encoder
 * ids fail loudly so callers can exit nonzero.
 */

import { createHash } from "node:crypto";

export interface SentenceEncoding {
  /** One Float32Array per token, each of the encoder's dimension. */
  readonly tokenVectors: Float32Array[];
  /** Sentence-level vector (row 0 of the exported record). */
  readonly sentenceVector: Float32Array;
}

export interface Encoder {
  readonly name: string;
  readonly dimension: number;
  encode(tokens: readonly string[]): SentenceEncoding;
}

export class EncoderLoadError extends Error {}

/** xoshiro128** over four u32 words; deterministic and dependency-free. */
class SeededRng {
  private s: Uint32Array;

  constructor(seedBytes: Buffer) {
    this.s = new Uint32Array(4);
    for (let i = 0; i < 4; i++) {
      this.s[i] = seedBytes.readUInt32LE(4 * i) || 0x9e3779b9;
    }
  }

  private static rotl(x: number, k: number): number {
    return ((x << k) | (x >>> (32 - k))) >>> 0;
  }

  nextU32(): number {
    const s = this.s;
    const result = (SeededRng.rotl(Math.imul(s[1], 5) >>> 0, 7) * 9) >>> 0;
    const t = (s[1] << 9) >>> 0;
    s[2] = (s[2] ^ s[0]) >>> 0;
    s[3] = (s[3] ^ s[1]) >>> 0;
    s[1] = (s[1] ^ s[2]) >>> 0;
    s[0] = (s[0] ^ s[3]) >>> 0;
    s[2] = (s[2] ^ t) >>> 0;
    s[3] = SeededRng.rotl(s[3], 11);
    return result;
  }

  /** Uniform in [-1, 1) with 32-bit resolution. */
  nextSymmetric(): number {
    return (this.nextU32() / 0x80000000) - 1.0;
  }
}

export class HashedContextEncoder implements Encoder {
  readonly name: string;
  readonly dimension: number;
  private readonly cache = new Map<string, Float32Array>();

  constructor(dimension: number) {
    if (!Number.isInteger(dimension) || dimension < 1) {
      throw new EncoderLoadError(`encoder dimension must be a positive integer, got ${dimension}`);
    }
    this.dimension = dimension;
    this.name = `hashed-context-${dimension}`;
  }

  private baseVector(token: string): Float32Array {
    let vec = this.cache.get(token);
    if (!vec) {
      const digest = createHash("sha256").update(token, "utf-8").digest();
      const rng = new SeededRng(digest);
      vec = new Float32Array(this.dimension);
      for (let i = 0; i < this.dimension; i++) {
        vec[i] = Math.fround(rng.nextSymmetric());
      }
      this.cache.set(token, vec);
    }
    return vec;
  }

  encode(tokens: readonly string[]): SentenceEncoding {
    const base = tokens.map((t) => this.baseVector(t));
    const tokenVectors = base.map((vec, i) => {
      const out = new Float32Array(this.dimension);
      const prev = base[i - 1];
      const next = base[i + 1];
      for (let d = 0; d < this.dimension; d++) {
        let v = 0.6 * vec[d];
        if (prev) v += 0.2 * prev[d];
        if (next) v += 0.2 * next[d];
        out[d] = Math.fround(v);
      }
      return out;
    });
    const sentenceVector = new Float32Array(this.dimension);
    if (tokenVectors.length > 0) {
      for (const vec of tokenVectors) {
        for (let d = 0; d < this.dimension; d++) {
          sentenceVector[d] += vec[d];
        }
      }
      for (let d = 0; d < this.dimension; d++) {
        sentenceVector[d] = Math.fround(sentenceVector[d] / tokenVectors.length);
      }
    }
    return { tokenVectors, sentenceVector };
  }
}

const HASHED_CONTEXT = /^hashed-context-(\d+)$/;

/**
 * Resolve an encoder id. Shipped ids follow ``hashed-context-<dim>``;
 * anything else raises EncoderLoadError.
 */
export function loadEncoder(encoderId: string): Encoder {
  const match = HASHED_CONTEXT.exec(encoderId);
  if (match) {
    return new HashedContextEncoder(Number.parseInt(match[1], 10));
  }
  throw new EncoderLoadError(
    `encoder "${encoderId}" is not available locally; ` +
      "shipped encoders match hashed-context-<dimension>",
  );
}
