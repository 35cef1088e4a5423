/**
 * SEB1 binary codec for sentence-embedding files.
 *
 * Layout (all integers little-endian): magic "SEB1", u32 record count, then
 * per record a u16 identifier byte length, the UTF-8 identifier, a u32
 * dimension, and dimension float32 values. Every record in a file must share
 * one dimension.
 */

export const SEB_MAGIC = Buffer.from("SEB1", "ascii");

export interface SebRecord {
  identifier: string;
  vector: Float32Array;
}

/** Serialize records to an SEB1 buffer. */
export function encodeSeb(records: SebRecord[]): Buffer {
  const parts: Buffer[] = [];
  const header = Buffer.alloc(8);
  SEB_MAGIC.copy(header, 0);
  header.writeUInt32LE(records.length, 4);
  parts.push(header);

  const seen = new Set<string>();
  for (const { identifier, vector } of records) {
    if (seen.has(identifier)) {
      throw new Error(`duplicate identifier: ${identifier}`);
    }
    seen.add(identifier);
    const idBytes = Buffer.from(identifier, "utf-8");
    if (idBytes.length > 0xffff) {
      throw new Error(`identifier too long: ${identifier}`);
    }
    const head = Buffer.alloc(6 + idBytes.length);
    head.writeUInt16LE(idBytes.length, 0);
    idBytes.copy(head, 2);
    head.writeUInt32LE(vector.length, 2 + idBytes.length);
    parts.push(head);

    const values = Buffer.alloc(4 * vector.length);
    for (let i = 0; i < vector.length; i++) {
      values.writeFloatLE(vector[i], 4 * i);
    }
    parts.push(values);
  }
  return Buffer.concat(parts);
}

/** Parse an SEB1 buffer; rejects bad magic, truncation, duplicates, and
 * mixed dimensions. */
export function decodeSeb(data: Buffer): SebRecord[] {
  if (data.length < 8 || !data.subarray(0, 4).equals(SEB_MAGIC)) {
    throw new Error("not an SEB1 file (bad magic)");
  }
  const count = data.readUInt32LE(4);
  const records: SebRecord[] = [];
  const seen = new Set<string>();
  let offset = 8;
  let dimension = 0;

  const need = (n: number) => {
    if (offset + n > data.length) {
      throw new Error("truncated SEB1 payload");
    }
  };

  for (let r = 0; r < count; r++) {
    need(2);
    const idLen = data.readUInt16LE(offset);
    offset += 2;
    need(idLen);
    const identifier = data.subarray(offset, offset + idLen).toString("utf-8");
    offset += idLen;
    need(4);
    const dim = data.readUInt32LE(offset);
    offset += 4;
    need(4 * dim);
    const vector = new Float32Array(dim);
    for (let i = 0; i < dim; i++) {
      vector[i] = data.readFloatLE(offset + 4 * i);
    }
    offset += 4 * dim;

    if (seen.has(identifier)) {
      throw new Error(`duplicate identifier: ${identifier}`);
    }
    seen.add(identifier);
    if (dimension === 0) {
      dimension = dim;
    } else if (dim !== dimension) {
      throw new Error(`dimension ${dim} for ${identifier} inconsistent with ${dimension}`);
    }
    records.push({ identifier, vector });
  }
  if (offset !== data.length) {
    throw new Error(`trailing bytes after ${count} records`);
  }
  return records;
}
