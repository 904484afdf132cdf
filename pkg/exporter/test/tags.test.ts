import { describe, expect, it } from "vitest";

import {
  applyTagConventions,
  DEP_TAGS,
  ENTITY_LABELS,
  ENTITY_MAP,
  mapPos,
  POS_TAGS,
  UNKNOWN,
} from "../src/tags.js";

describe("mapPos", () => {
  it("passes through every universal tag unchanged", () => {
    for (const tag of POS_TAGS) {
      expect(mapPos(tag)).toBe(tag);
    }
  });

  it("coerces anything outside the closed set to UNKNOWN", () => {
    expect(mapPos("SPACE")).toBe(UNKNOWN);
    expect(mapPos("")).toBe(UNKNOWN);
    expect(mapPos("noun")).toBe(UNKNOWN);
  });
});

describe("applyTagConventions", () => {
  function pos(pairs: [string, string][]) {
    const tokens = pairs.map(([text, p]) => ({ text, pos: p }));
    applyTagConventions(tokens);
    return tokens.map((t) => t.pos);
  }

  it("retags the story-initial As from ADP to SCONJ", () => {
    expect(pos([["As", "ADP"], ["a", "DET"], ["user", "NOUN"]])).toEqual([
      "SCONJ", "DET", "NOUN",
    ]);
  });

  it("leaves a mid-sentence as alone", () => {
    expect(pos([["flag", "NOUN"], ["as", "ADP"], ["spam", "NOUN"]])).toEqual([
      "NOUN", "ADP", "NOUN",
    ]);
  });

  it("retags both halves of so-that to SCONJ", () => {
    expect(
      pos([["done", "ADJ"], ["so", "ADV"], ["that", "DET"], ["I", "PRON"]]),
    ).toEqual(["ADJ", "SCONJ", "SCONJ", "PRON"]);
  });

  it("does not touch a lone so", () => {
    expect(pos([["so", "ADV"], ["nice", "ADJ"]])).toEqual(["ADV", "ADJ"]);
  });

  it("retags modal auxiliaries to VERB", () => {
    expect(pos([["I", "PRON"], ["can", "AUX"], ["share", "VERB"]])).toEqual([
      "PRON", "VERB", "VERB",
    ]);
    expect(pos([["they", "PRON"], ["would", "AUX"], ["agree", "VERB"]])).toEqual([
      "PRON", "VERB", "VERB",
    ]);
  });

  it("leaves non-modal auxiliaries as AUX", () => {
    expect(pos([["it", "PRON"], ["is", "AUX"], ["done", "VERB"]])).toEqual([
      "PRON", "AUX", "VERB",
    ]);
  });

  it("retags possessive determiners from PRON to DET", () => {
    expect(pos([["my", "PRON"], ["team", "NOUN"]])).toEqual(["DET", "NOUN"]);
    expect(pos([["their", "PRON"], ["files", "NOUN"]])).toEqual(["DET", "NOUN"]);
  });

  it("leaves ordinary pronouns as PRON", () => {
    expect(pos([["I", "PRON"], ["like", "VERB"], ["them", "PRON"]])).toEqual([
      "PRON", "VERB", "PRON",
    ]);
  });
});

describe("ENTITY_MAP", () => {
  it("maps only into the closed entity label set", () => {
    for (const mapped of Object.values(ENTITY_MAP)) {
      if (mapped !== null) {
        expect(ENTITY_LABELS.has(mapped)).toBe(true);
      }
    }
  });

  it("redirects DURATION to TIME", () => {
    expect(ENTITY_MAP.DURATION).toBe("TIME");
  });

  it("drops web-speak types instead of substituting them", () => {
    for (const kind of ["EMAIL", "URL", "HASHTAG", "MENTION"]) {
      expect(ENTITY_MAP[kind]).toBeNull();
    }
  });
});

describe("closed sets", () => {
  it("carry the expected sizes", () => {
    expect(POS_TAGS.size).toBe(17);
    expect(DEP_TAGS.size).toBe(45);
    expect(ENTITY_LABELS.size).toBe(19);
  });

  it("include the anchors the annotator leans on", () => {
    for (const tag of ["NOUN", "VERB", "ADP", "SCONJ", "DET", "PRON"]) {
      expect(POS_TAGS.has(tag)).toBe(true);
    }
    for (const rel of ["ROOT", "nsubj", "dobj", "pobj", "prep", "advcl", "xcomp"]) {
      expect(DEP_TAGS.has(rel)).toBe(true);
    }
    for (const label of ["CARDINAL", "DATE", "TIME", "MONEY", "ORDINAL", "PERCENT"]) {
      expect(ENTITY_LABELS.has(label)).toBe(true);
    }
  });
});
