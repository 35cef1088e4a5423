/**
 * Batch export: read "identifier TAB sentence" lines, encode each sentence,
 * and write one SEB1 record per line with identifiers preserved.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { Encoder, deterministicEncoder } from "./encoder.js";
import { SebRecord, encodeSeb } from "./seb.js";

export interface ExportManifest {
  inputPath: string;
  outputPath: string;
  encoderName: string;
  expectedDimension: number;
}

export interface ParsedLine {
  identifier: string;
  sentence: string;
}

/** Parse the input text: one "identifier TAB sentence" per line, UTF-8.
 * Blank lines are skipped; duplicate identifiers are an error. */
export function parseInput(text: string): ParsedLine[] {
  const lines: ParsedLine[] = [];
  const seen = new Set<string>();
  text.split("\n").forEach((raw, index) => {
    if (raw.trim() === "") {
      return;
    }
    const tab = raw.indexOf("\t");
    if (tab <= 0) {
      throw new Error(`line ${index + 1}: expected "identifier<TAB>sentence"`);
    }
    const identifier = raw.slice(0, tab);
    if (seen.has(identifier)) {
      throw new Error(`line ${index + 1}: duplicate identifier ${identifier}`);
    }
    seen.add(identifier);
    lines.push({ identifier, sentence: raw.slice(tab + 1) });
  });
  return lines;
}

/** Run the encoder over every input line and write the SEB1 file. Returns
 * the number of records written. */
export function exportSentenceEmbeddings(
  manifest: ExportManifest,
  encoder: Encoder = deterministicEncoder(manifest.expectedDimension),
): number {
  if (encoder.dimension !== manifest.expectedDimension) {
    throw new Error(
      `encoder ${encoder.name} emits ${encoder.dimension} dims, ` +
        `manifest expects ${manifest.expectedDimension}`,
    );
  }
  const lines = parseInput(readFileSync(manifest.inputPath, "utf-8"));
  const records: SebRecord[] = lines.map(({ identifier, sentence }) => {
    const vector = encoder.encode(sentence);
    if (vector.length !== manifest.expectedDimension) {
      throw new Error(
        `encoder returned ${vector.length} dims for ${identifier}, ` +
          `expected ${manifest.expectedDimension}`,
      );
    }
    return { identifier, vector };
  });
  writeFileSync(manifest.outputPath, encodeSeb(records));
  return records.length;
}
