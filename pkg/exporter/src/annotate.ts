/**
 * Turn one raw story line into the corpus schema's parallel streams:
 * tokens, coarse POS, dependency relations, and the entity-substituted
 * token stream.
 *
 * The toolkit handles tokenization, POS tagging, and entity spans; the
 * mapping layer reconciles its tagset with the schema's closed sets,
 * and the dependency relations come from the story-grammar rules.
 */

import winkNLP, {
  type ItemEntity,
  type ItemToken,
  type WinkMethods,
} from "wink-nlp";
import model from "wink-eng-lite-web-model";

import { annotateDependencies } from "./deps.js";
import {
  ENTITY_MAP,
  UNKNOWN,
  applyTagConventions,
  mapPos,
} from "./tags.js";

/** One story in the corpus JSONL schema. */
export interface StoryRecord {
  id: string;
  dataset: number;
  text: string;
  tokens: string[];
  pos: string[];
  dep: string[];
  entities: string[];
  privacy_categories: [string, number][];
  privacy_words: string[];
  label: 0 | 1;
}

/** Mutable counters accumulated over one export run. */
export interface RunCounters {
  unmappedPos: Map<string, number>;
  unmappedEntities: Map<string, number>;
}

export function newCounters(): RunCounters {
  return { unmappedPos: new Map(), unmappedEntities: new Map() };
}

function bump(counter: Map<string, number>, key: string): void {
  counter.set(key, (counter.get(key) ?? 0) + 1);
}

// token types that never carry lexical content
const DROPPED_TYPES = new Set(["punctuation", "symbol", "emoji", "emoticon"]);

let sharedPipeline: WinkMethods | null = null;

/** The toolkit pipeline is expensive to load; share one instance. */
export function pipeline(): WinkMethods {
  if (sharedPipeline === null) {
    sharedPipeline = winkNLP(model);
  }
  return sharedPipeline;
}

interface RawToken {
  text: string;
  pos: string;
  entity: string | null; // toolkit entity type, pre-mapping
}

/**
 * Tokenize with the toolkit, drop punctuation, and split any token on
 * its internal separators ("12-19-2017" becomes three NUM tokens),
 * each part inheriting the parent's POS and entity span.
 */
function lexicalTokens(nlp: WinkMethods, text: string): RawToken[] {
  const its = nlp.its;
  const doc = nlp.readDoc(text);

  const entityOf = new Map<number, string>();
  doc.entities().each((entity: ItemEntity) => {
    const kind = entity.out(its.type);
    entity.tokens().each((token: ItemToken) => {
      entityOf.set(token.index(), kind);
    });
  });

  const out: RawToken[] = [];
  doc.tokens().each((token: ItemToken) => {
    const type = token.out(its.type);
    if (DROPPED_TYPES.has(type)) return;
    const pos = token.out(its.pos);
    const entity = entityOf.get(token.index()) ?? null;
    for (const part of token.out().split(/[^\p{L}\p{N}]+/u)) {
      if (part.length === 0) continue;
      out.push({ text: part, pos, entity });
    }
  });
  return out;
}

export class EmptyStoryError extends Error {}

/**
 * Annotate one story. Throws EmptyStoryError when the toolkit yields
 * no lexical tokens; throws plain Error on stream-length drift, which
 * callers must treat as fatal.
 */
export function annotateStory(
  id: string,
  text: string,
  label: 0 | 1,
  counters: RunCounters,
): StoryRecord {
  const nlp = pipeline();
  const raw = lexicalTokens(nlp, text);
  if (raw.length === 0) {
    throw new EmptyStoryError(`story ${id}: no lexical tokens`);
  }

  const posTokens = raw.map((t) => {
    const mapped = mapPos(t.pos);
    if (mapped === UNKNOWN) bump(counters.unmappedPos, t.pos);
    return { text: t.text, pos: mapped };
  });
  applyTagConventions(posTokens);

  const dep = annotateDependencies(posTokens);

  const entities = raw.map((t, i) => {
    if (t.entity === null) return t.text;
    const label_ = ENTITY_MAP[t.entity];
    if (label_ === undefined || label_ === null) {
      bump(counters.unmappedEntities, t.entity);
      return t.text;
    }
    return label_;
  });

  const tokens = raw.map((t) => t.text);
  const pos = posTokens.map((t) => t.pos);
  for (const stream of [pos, dep, entities]) {
    if (stream.length !== tokens.length) {
      throw new Error(
        `story ${id}: annotation streams diverged ` +
          `(${tokens.length} tokens vs ${stream.length} tags)`,
      );
    }
  }

  return {
    id,
    dataset: 1,
    text,
    tokens,
    pos,
    dep,
    entities,
    privacy_categories: [],
    privacy_words: [],
    label,
  };
}
