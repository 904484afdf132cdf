#!/usr/bin/env node
/**
 * Command line: `annotate-exporter export --in stories.txt --out
 * corpus.jsonl [--labels labels.tsv]`.
 *
 * Exit codes: 0 ok, 1 internal (annotation drift / toolkit bug),
 * 3 config or IO problem, 4 input data invalid.
 */

import { realpathSync } from "node:fs";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { MAPPING_VERSION } from "./tags.js";
import { DataFormatError } from "./io.js";
import { exportAnnotations } from "./export.js";

const USAGE = `usage: annotate-exporter export --in <stories.txt> --out <corpus.jsonl> [--labels <labels.tsv>]

Annotate raw user stories (one per line, optional "id<TAB>text" form)
into the corpus JSONL schema: tokens, coarse POS, dependency
relations, entity-substituted stream. Labels file: "id<TAB>0|1" per
line; stories without a row get label 0.

tag mapping version: ${MAPPING_VERSION}
`;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        labels: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    });
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n${USAGE}`);
    return 3;
  }

  if (parsed.values.help) {
    process.stdout.write(USAGE);
    return 0;
  }
  const [command] = parsed.positionals;
  if (command !== "export") {
    process.stderr.write(
      `error: unknown command "${command ?? ""}"\n${USAGE}`,
    );
    return 3;
  }
  const { in: input, out: output, labels } = parsed.values;
  if (!input || !output) {
    process.stderr.write(`error: --in and --out are required\n${USAGE}`);
    return 3;
  }

  let summary;
  try {
    summary = exportAnnotations(input, output, labels);
  } catch (err) {
    if (err instanceof DataFormatError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 4;
    }
    if ((err as NodeJS.ErrnoException).code !== undefined) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 3;
    }
    process.stderr.write(`internal error: ${(err as Error).message}\n`);
    return 1;
  }

  process.stderr.write(`wrote ${summary.written} stories to ${output}\n`);
  if (summary.labelled > 0) {
    process.stderr.write(`labels merged: ${summary.labelled}\n`);
  }
  for (const id of summary.labelIdsWithoutStory) {
    process.stderr.write(`note: label for unknown story id ${id}\n`);
  }
  for (const skip of summary.skipped) {
    process.stderr.write(`skipped ${skip.id}: ${skip.reason}\n`);
  }
  if (summary.skipped.length > 0) {
    process.stderr.write(`skipped lines: ${summary.skipped.length}\n`);
  }
  const report = (name: string, counter: Map<string, number>) => {
    if (counter.size === 0) return;
    const parts = [...counter.entries()]
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([tag, count]) => `${tag} (${count})`);
    process.stderr.write(`${name} left unmapped: ${parts.join(", ")}\n`);
  };
  report("POS tags", summary.counters.unmappedPos);
  report("entity labels", summary.counters.unmappedEntities);
  return 0;
}

// bin shims are symlinks, so resolve argv[1] before comparing
const isDirectRun = (() => {
  if (process.argv[1] === undefined) return false;
  try {
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
})();
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
