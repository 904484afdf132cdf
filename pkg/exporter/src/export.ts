/**
 * The export operation: read raw stories, annotate each line, merge
 * optional labels, and write corpus JSONL. Per-line toolkit failures
 * skip the line; anything structural aborts the run.
 */

import { readFileSync, writeFileSync } from "node:fs";

import {
  EmptyStoryError,
  annotateStory,
  newCounters,
  type RunCounters,
} from "./annotate.js";
import { parseLabelFile, parseStoryFile, toJsonLine } from "./io.js";

export interface ExportSummary {
  written: number;
  skipped: { id: string; reason: string }[];
  labelled: number;
  labelIdsWithoutStory: string[];
  counters: RunCounters;
}

export function exportAnnotations(
  inputPath: string,
  outputPath: string,
  labelPath?: string,
): ExportSummary {
  const stories = parseStoryFile(readFileSync(inputPath, "utf-8"));
  const labels = labelPath
    ? parseLabelFile(readFileSync(labelPath, "utf-8"))
    : new Map<string, 0 | 1>();

  const counters = newCounters();
  const skipped: { id: string; reason: string }[] = [];
  const lines: string[] = [];
  const storyIds = new Set<string>();
  let labelled = 0;

  for (const story of stories) {
    storyIds.add(story.id);
    let label: 0 | 1 = 0;
    const fromFile = labels.get(story.id);
    if (fromFile !== undefined) {
      label = fromFile;
      labelled++;
    }
    try {
      lines.push(toJsonLine(annotateStory(story.id, story.text, label, counters)));
    } catch (err) {
      if (err instanceof EmptyStoryError) {
        skipped.push({ id: story.id, reason: err.message });
        continue;
      }
      throw err; // stream-length drift and toolkit bugs abort the run
    }
  }

  writeFileSync(outputPath, lines.map((l) => l + "\n").join(""), "utf-8");

  return {
    written: lines.length,
    skipped,
    labelled,
    labelIdsWithoutStory: [...labels.keys()].filter((id) => !storyIds.has(id)),
    counters,
  };
}
