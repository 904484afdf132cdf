/**
 * File formats: the raw story file (one story per line, optionally
 * "id<TAB>text"), the label file ("id<TAB>0|1"), and the JSONL
 * serialization with the schema's canonical key order.
 */

import type { StoryRecord } from "./annotate.js";

export class DataFormatError extends Error {}

export interface RawStory {
  id: string;
  text: string;
}

/**
 * Parse a raw story file: UTF-8, one story per line, no empty lines
 * (a trailing newline is fine). A line containing a TAB is read as
 * "id<TAB>text"; ids must then be unique. Lines without ids are
 * numbered us-000000, us-000001, ... by position.
 */
export function parseStoryFile(content: string): RawStory[] {
  const lines = content.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  const seen = new Set<string>();
  const stories: RawStory[] = [];
  lines.forEach((line, index) => {
    if (line.trim() === "") {
      throw new DataFormatError(`line ${index + 1}: empty line`);
    }
    const tab = line.indexOf("\t");
    let id: string;
    let text: string;
    if (tab >= 0) {
      id = line.slice(0, tab).trim();
      text = line.slice(tab + 1).trim();
      if (id === "" || text === "") {
        throw new DataFormatError(
          `line ${index + 1}: id and text must both be non-empty`,
        );
      }
    } else {
      id = `us-${String(index).padStart(6, "0")}`;
      text = line.trim();
    }
    if (seen.has(id)) {
      throw new DataFormatError(`line ${index + 1}: duplicate id ${id}`);
    }
    seen.add(id);
    stories.push({ id, text });
  });
  return stories;
}

/** Parse a label file: "id<TAB>0|1" per line, empty lines rejected. */
export function parseLabelFile(content: string): Map<string, 0 | 1> {
  const lines = content.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  const labels = new Map<string, 0 | 1>();
  lines.forEach((line, index) => {
    const parts = line.split("\t");
    if (parts.length !== 2 || parts[0].trim() === "") {
      throw new DataFormatError(
        `label line ${index + 1}: expected "id<TAB>0|1"`,
      );
    }
    const value = parts[1].trim();
    if (value !== "0" && value !== "1") {
      throw new DataFormatError(
        `label line ${index + 1}: label must be 0 or 1, got "${value}"`,
      );
    }
    const id = parts[0].trim();
    if (labels.has(id)) {
      throw new DataFormatError(`label line ${index + 1}: duplicate id ${id}`);
    }
    labels.set(id, value === "1" ? 1 : 0);
  });
  return labels;
}

const FIELD_ORDER: (keyof StoryRecord)[] = [
  "id", "dataset", "text", "tokens", "pos", "dep", "entities",
  "privacy_categories", "privacy_words", "label",
];

/** Serialize one record with the schema's canonical key order. */
export function toJsonLine(record: StoryRecord): string {
  const ordered: Record<string, unknown> = {};
  for (const key of FIELD_ORDER) {
    ordered[key] = record[key];
  }
  return JSON.stringify(ordered);
}
