/**
 * Command line:
 *
 *     bridge export --corpus DIR --out FILE [--encoder hashed-context-64] [--max-len 210]
 *     bridge verify --file FILE --corpus DIR
 *
 * Exit codes: 0 success, 1 failed verification or missing input,
 * 2 usage error, 3 encoder load failure.
 */

import { EncoderLoadError, loadEncoder } from "./encoder.js";
import { DEFAULT_MAX_TOKENS, exportCorpus } from "./export.js";
import { EmbeddingFormatError } from "./format.js";
import { verifyFile } from "./verify.js";

const USAGE = `usage:
  export --corpus DIR --out FILE [--encoder ID] [--max-len N]
  verify --file FILE --corpus DIR`;

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new UsageError(`bad argument ${key}`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

class UsageError extends Error {}

function requireFlag(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) {
    throw new UsageError(`missing required flag --${name}`);
  }
  return value;
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === "export") {
      const flags = parseFlags(rest);
      const encoder = loadEncoder(flags.get("encoder") ?? "hashed-context-64");
      const maxTokens = Number.parseInt(
        flags.get("max-len") ?? String(DEFAULT_MAX_TOKENS),
        10,
      );
      if (!Number.isInteger(maxTokens) || maxTokens < 1) {
        throw new UsageError("--max-len must be a positive integer");
      }
      const result = exportCorpus(
        requireFlag(flags, "corpus"),
        encoder,
        requireFlag(flags, "out"),
        { maxTokens },
      );
      const file = result.file;
      process.stdout.write(
        `exported ${file.records.length}/${result.sentenceCount} sentences ` +
          `(${file.skippedSentences} skipped, ${file.truncatedSentences} truncated) ` +
          `with ${file.encoderName}\n`,
      );
      return 0;
    }
    if (command === "verify") {
      const flags = parseFlags(rest);
      const report = verifyFile(requireFlag(flags, "file"), requireFlag(flags, "corpus"));
      for (const violation of report.violations) {
        process.stderr.write(`violation: ${violation}\n`);
      }
      process.stdout.write(
        `records ${report.recordCount}, tokens ${report.tokenCount}, ` +
          `re-slice rate ${(100 * report.resliceRate).toFixed(2)}%: ` +
          `${report.clean ? "clean" : "NOT clean"}\n`,
      );
      return report.clean ? 0 : 1;
    }
    throw new UsageError(`unknown command ${command ?? "(none)"}`);
  } catch (error) {
    if (error instanceof UsageError) {
      process.stderr.write(`error: ${error.message}\n${USAGE}\n`);
      return 2;
    }
    if (error instanceof EncoderLoadError) {
      process.stderr.write(`error: ${error.message}\n`);
      return 3;
    }
    if (error instanceof EmbeddingFormatError || error instanceof Error) {
      process.stderr.write(`error: ${error.message}\n`);
      return 1;
    }
    throw error;
  }
}

import { pathToFileURL } from "node:url";

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exitCode = main(process.argv.slice(2));
}
