/**
 * Sentence encoders.
 *
 * An Encoder maps a sentence string to a fixed-dimension Float32Array. The
 * bundled deterministic encoder derives vectors from SHA-256 of the sentence
 * text: stable across runs and platforms, ideal for format round-trips and
 * pipeline plumbing, but carrying no semantic signal. A real pretrained
 * encoder (e.g. an InferSent service producing 4096-dim vectors) plugs in by
 * implementing this interface.
 */

import { createHash } from "node:crypto";

export interface Encoder {
  readonly name: string;
  readonly dimension: number;
  encode(sentence: string): Float32Array;
}

/**
 * Hash-derived vectors in [-1, 1): block b of the output is
 * sha256(utf8(sentence) + u32le(b)), each 32-byte digest yielding eight
 * little-endian u32 values mapped to u / 2^31 - 1.
 */
export function deterministicEncoder(dimension = 4096): Encoder {
  if (dimension < 1 || dimension % 8 !== 0) {
    throw new Error(`dimension must be a positive multiple of 8, got ${dimension}`);
  }
  return {
    name: "deterministic-sha256",
    dimension,
    encode(sentence: string): Float32Array {
      const vector = new Float32Array(dimension);
      const text = Buffer.from(sentence, "utf-8");
      const blockIndex = Buffer.alloc(4);
      for (let block = 0; block < dimension / 8; block++) {
        blockIndex.writeUInt32LE(block, 0);
        const digest = createHash("sha256").update(text).update(blockIndex).digest();
        for (let i = 0; i < 8; i++) {
          vector[block * 8 + i] = digest.readUInt32LE(4 * i) / 2 ** 31 - 1;
        }
      }
      return vector;
    },
  };
}

const ENCODERS: Record<string, (dimension: number) => Encoder> = {
  deterministic: deterministicEncoder,
};

export function makeEncoder(name: string, dimension: number): Encoder {
  const factory = ENCODERS[name];
  if (!factory) {
    throw new Error(
      `unknown encoder ${name}; available: ${Object.keys(ENCODERS).join(", ")}`,
    );
  }
  return factory(dimension);
}
