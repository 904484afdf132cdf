import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { annotateStory, newCounters } from "../src/annotate.js";

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/worked-example.json", import.meta.url), "utf-8"),
) as { text: string; tokens: string[]; pos: string[]; dep: string[] };

describe("worked example", () => {
  const record = annotateStory("fig1", fixture.text, 1, newCounters());

  it("yields exactly the 24 reference tokens", () => {
    expect(record.tokens).toEqual(fixture.tokens);
    expect(record.tokens).toHaveLength(24);
  });

  it("matches the reference POS and dependency on >= 22 of 24 positions", () => {
    let agreement = 0;
    const mismatches: string[] = [];
    for (let i = 0; i < fixture.tokens.length; i++) {
      if (record.pos[i] === fixture.pos[i] && record.dep[i] === fixture.dep[i]) {
        agreement++;
      } else {
        mismatches.push(
          `${i} ${record.tokens[i]}: ${record.pos[i]}/${record.dep[i]} ` +
            `vs ${fixture.pos[i]}/${fixture.dep[i]}`,
        );
      }
    }
    expect(agreement, mismatches.join("; ")).toBeGreaterThanOrEqual(22);
  });

  it("keeps the streams parallel and the label/placeholders intact", () => {
    expect(record.pos).toHaveLength(record.tokens.length);
    expect(record.dep).toHaveLength(record.tokens.length);
    expect(record.entities).toHaveLength(record.tokens.length);
    expect(record.privacy_categories).toEqual([]);
    expect(record.privacy_words).toEqual([]);
    expect(record.label).toBe(1);
  });
});
