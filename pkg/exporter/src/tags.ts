/**
 * Tag inventories and the versioned mapping from the toolkit's output
 * onto the corpus schema's closed sets.
 *
 * The closed sets mirror the consumer's published contract: POS and
 * dependency tags outside them are coerced to UNKNOWN on load, and an
 * entity-stream entry counts as an entity exactly when it equals one
 * of the entity labels. Bump MAPPING_VERSION whenever any rule below
 * changes so annotation drift stays detectable through corpus hashes.
 */

export const MAPPING_VERSION = "wink-upos/1";

export const UNKNOWN = "UNKNOWN";

export const POS_TAGS: ReadonlySet<string> = new Set([
  "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
  "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
]);

export const DEP_TAGS: ReadonlySet<string> = new Set([
  "ROOT", "acl", "acomp", "advcl", "advmod", "agent", "amod", "appos",
  "attr", "aux", "auxpass", "case", "cc", "ccomp", "compound", "conj",
  "csubj", "csubjpass", "dative", "dep", "det", "dobj", "expl", "intj",
  "mark", "meta", "neg", "nmod", "npadvmod", "nsubj", "nsubjpass",
  "nummod", "oprd", "parataxis", "pcomp", "pobj", "poss", "preconj",
  "predet", "prep", "prt", "punct", "quantmod", "relcl", "xcomp",
]);

export const ENTITY_LABELS: ReadonlySet<string> = new Set([
  "CARDINAL", "DATE", "EVENT", "FAC", "GPE", "HEALTH", "LANGUAGE", "LAW",
  "LOC", "MONEY", "NORP", "ORDINAL", "ORG", "PERCENT", "PERSON",
  "PRODUCT", "QUANTITY", "TIME", "WORK_OF_ART",
]);

/**
 * Toolkit entity type -> closed entity label. `null` marks types the
 * schema has no label for; their tokens stay unsubstituted and the
 * run summary counts them.
 */
export const ENTITY_MAP: Readonly<Record<string, string | null>> = {
  CARDINAL: "CARDINAL",
  DATE: "DATE",
  DURATION: "TIME",
  TIME: "TIME",
  MONEY: "MONEY",
  ORDINAL: "ORDINAL",
  PERCENT: "PERCENT",
  EMAIL: null,
  EMOJI: null,
  EMOTICON: null,
  HASHTAG: null,
  MENTION: null,
  URL: null,
};

export const MODAL_VERBS: ReadonlySet<string> = new Set([
  "can", "could", "may", "might", "must", "shall", "should", "will",
  "would",
]);

export const POSSESSIVE_DETERMINERS: ReadonlySet<string> = new Set([
  "my", "your", "his", "her", "its", "our", "their",
]);

const BE_FORMS: ReadonlySet<string> = new Set([
  "am", "is", "are", "was", "were", "be", "been", "being",
]);

export function isModal(word: string): boolean {
  return MODAL_VERBS.has(word.toLowerCase());
}

export function isPossessive(word: string): boolean {
  return POSSESSIVE_DETERMINERS.has(word.toLowerCase());
}

export function isBeForm(word: string): boolean {
  return BE_FORMS.has(word.toLowerCase());
}

/** Coerce one POS tag into the closed set. */
export function mapPos(tag: string): string {
  return POS_TAGS.has(tag) ? tag : UNKNOWN;
}

export interface PosToken {
  text: string;
  pos: string;
}

/**
 * Reconcile the toolkit's modern universal tags with the conventions
 * the annotation schema documents (an older tagger generation):
 *
 * - the story-opening "As" that introduces the role phrase is SCONJ,
 *   not ADP;
 * - both halves of the "so that" purpose connective are SCONJ;
 * - modal verbs are VERB, not AUX;
 * - possessive determiners (my, their, ...) are DET, not PRON.
 *
 * Mutates `pos` in place; the token texts are never touched.
 */
export function applyTagConventions(tokens: PosToken[]): void {
  for (let i = 0; i < tokens.length; i++) {
    const word = tokens[i].text.toLowerCase();
    if (i === 0 && word === "as" && tokens[i].pos === "ADP") {
      tokens[i].pos = "SCONJ";
    }
    if (
      word === "so" &&
      i + 1 < tokens.length &&
      tokens[i + 1].text.toLowerCase() === "that"
    ) {
      tokens[i].pos = "SCONJ";
      tokens[i + 1].pos = "SCONJ";
    }
    if (isModal(word) && tokens[i].pos === "AUX") {
      tokens[i].pos = "VERB";
    }
    if (isPossessive(word) && tokens[i].pos === "PRON") {
      tokens[i].pos = "DET";
    }
  }
}
