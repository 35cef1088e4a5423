#!/usr/bin/env node
/**
 * embed-export --input sentences.tsv --output vectors.seb [--dim 4096]
 *              [--encoder deterministic]
 */

import { makeEncoder } from "./encoder.js";
import { exportSentenceEmbeddings } from "./export.js";

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`bad argument ${flag}`);
    }
    args.set(flag.slice(2), value);
  }
  return args;
}

export function main(argv: string[]): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  const inputPath = args.get("input");
  const outputPath = args.get("output");
  if (!inputPath || !outputPath) {
    console.error("usage: embed-export --input FILE --output FILE [--dim N] [--encoder NAME]");
    return 2;
  }
  const dimension = Number(args.get("dim") ?? "4096");
  const encoderName = args.get("encoder") ?? "deterministic";
  try {
    const encoder = makeEncoder(encoderName, dimension);
    const count = exportSentenceEmbeddings(
      { inputPath, outputPath, encoderName, expectedDimension: dimension },
      encoder,
    );
    console.log(`wrote ${count} record(s) to ${outputPath}`);
    return 0;
  } catch (err) {
    console.error(`export error: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
