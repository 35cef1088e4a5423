import assert from "node:assert/strict";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { deterministicEncoder } from "../src/encoder.js";
import { exportSentenceEmbeddings } from "../src/export.js";
import { decodeSeb, encodeSeb } from "../src/seb.js";

function workdir(): string {
  return mkdtempSync(join(tmpdir(), "embed-export-"));
}

test("five-sentence export round-trips bitwise through the codec", () => {
  const dir = workdir();
  const input = join(dir, "sentences.tsv");
  const output = join(dir, "vectors.seb");
  const sentences: Array<[string, string]> = [
    ["q0", "Which country's name means equator?"],
    ["q0-p000#0", "Ecuador : Equator in Spanish."],
    ["q0-p000#1", "The country lies on the Equator."],
    ["q0-p001", "The equator crosses just north of Quito."],
    ["q1", "World cup 1998 was held in France."],
  ];
  writeFileSync(input, sentences.map(([id, s]) => `${id}\t${s}`).join("\n") + "\n");

  const count = exportSentenceEmbeddings({
    inputPath: input,
    outputPath: output,
    encoderName: "deterministic",
    expectedDimension: 4096,
  });
  assert.equal(count, 5);

  const records = decodeSeb(readFileSync(output));
  assert.deepEqual(
    records.map((r) => r.identifier),
    sentences.map(([id]) => id),
  );
  const encoder = deterministicEncoder(4096);
  for (const record of records) {
    assert.equal(record.vector.length, 4096);
    const expected = encoder.encode(sentences.find(([id]) => id === record.identifier)![1]);
    // bitwise float32 equality, including any negative zeros
    assert.deepEqual(
      Buffer.from(record.vector.buffer, record.vector.byteOffset, 4 * record.vector.length),
      Buffer.from(expected.buffer, 0, 4 * expected.length),
    );
  }
});

test("empty input produces a zero-record file", () => {
  const dir = workdir();
  const input = join(dir, "empty.tsv");
  const output = join(dir, "empty.seb");
  writeFileSync(input, "");
  const count = exportSentenceEmbeddings({
    inputPath: input,
    outputPath: output,
    encoderName: "deterministic",
    expectedDimension: 4096,
  });
  assert.equal(count, 0);
  assert.deepEqual(decodeSeb(readFileSync(output)), []);
});

test("the same sentence under two identifiers gets identical vectors", () => {
  const dir = workdir();
  const input = join(dir, "dup.tsv");
  const output = join(dir, "dup.seb");
  writeFileSync(input, "a\tQuito is the capital.\nb\tQuito is the capital.\n");
  exportSentenceEmbeddings({
    inputPath: input,
    outputPath: output,
    encoderName: "deterministic",
    expectedDimension: 64,
  }, deterministicEncoder(64));
  const [a, b] = decodeSeb(readFileSync(output));
  assert.deepEqual(Array.from(a.vector), Array.from(b.vector));
});

test("duplicate identifiers are rejected", () => {
  const dir = workdir();
  const input = join(dir, "dup-id.tsv");
  writeFileSync(input, "a\tone sentence\na\tanother sentence\n");
  assert.throws(
    () =>
      exportSentenceEmbeddings({
        inputPath: input,
        outputPath: join(dir, "out.seb"),
        encoderName: "deterministic",
        expectedDimension: 64,
      }, deterministicEncoder(64)),
    /duplicate identifier/,
  );
});

test("malformed lines are rejected with their line number", () => {
  const dir = workdir();
  const input = join(dir, "bad.tsv");
  writeFileSync(input, "a\tfine\nno-tab-here\n");
  assert.throws(
    () =>
      exportSentenceEmbeddings({
        inputPath: input,
        outputPath: join(dir, "out.seb"),
        encoderName: "deterministic",
        expectedDimension: 64,
      }, deterministicEncoder(64)),
    /line 2/,
  );
});

test("encoder dimension must match the manifest", () => {
  const dir = workdir();
  const input = join(dir, "in.tsv");
  writeFileSync(input, "a\tsentence\n");
  assert.throws(
    () =>
      exportSentenceEmbeddings({
        inputPath: input,
        outputPath: join(dir, "out.seb"),
        encoderName: "deterministic",
        expectedDimension: 4096,
      }, deterministicEncoder(64)),
    /expects 4096/,
  );
});

test("codec rejects corrupted payloads", () => {
  const encoder = deterministicEncoder(8);
  const good = encodeSeb([{ identifier: "x", vector: encoder.encode("hello") }]);
  assert.throws(() => decodeSeb(Buffer.from("XXXX")), /magic/);
  assert.throws(() => decodeSeb(good.subarray(0, good.length - 3)), /truncated/);
  assert.throws(() => decodeSeb(Buffer.concat([good, Buffer.from("!")])), /trailing/);
  assert.throws(
    () =>
      encodeSeb([
        { identifier: "x", vector: encoder.encode("a") },
        { identifier: "x", vector: encoder.encode("b") },
      ]),
    /duplicate/,
  );
});

test("encoder output is deterministic across calls", () => {
  const encoder = deterministicEncoder(4096);
  const a = encoder.encode("The name of the country is derived from its position.");
  const b = encoder.encode("The name of the country is derived from its position.");
  assert.deepEqual(Array.from(a), Array.from(b));
  assert.ok(a.every((v) => v >= -1 && v < 1));
});
