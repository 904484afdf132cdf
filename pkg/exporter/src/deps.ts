/**
 * Rule-based dependency annotation for English user stories.
 *
 * The toolkit supplies tokens and parts of speech but no syntactic
 * parse, so the relations are assigned by rules tuned to the story
 * grammar "As a <role>, I want to <action> ..., so that <purpose>".
 * Ordinary prose still comes out reasonable: the rules only lean on
 * POS categories, preposition/verb adjacency, and the two fixed
 * connectives.
 */

import { DEP_TAGS, UNKNOWN, isBeForm, isModal, isPossessive } from "./tags.js";

const NOMINAL = new Set(["NOUN", "PROPN"]);
const NP_MEMBER = new Set(["DET", "ADJ", "NUM", "NOUN", "PROPN"]);

interface Token {
  text: string;
  pos: string;
}

function inDepSet(tag: string): string {
  return DEP_TAGS.has(tag) ? tag : UNKNOWN;
}

/**
 * Annotate one noun-phrase run starting at `start`: the last nominal
 * is the head and receives `headDep`; everything before it modifies
 * the head (det/poss/amod/nummod/compound/cc). Returns the index one
 * past the run, or `start` when no phrase begins here.
 */
function annotateNounPhrase(
  tokens: readonly Token[],
  dep: string[],
  start: number,
  headDep: string,
): number {
  let end = start;
  while (
    end < tokens.length &&
    (NP_MEMBER.has(tokens[end].pos) ||
      (tokens[end].pos === "CCONJ" &&
        end + 1 < tokens.length &&
        NP_MEMBER.has(tokens[end + 1].pos)))
  ) {
    end++;
  }
  if (end === start) return start;

  let head = -1;
  for (let i = end - 1; i >= start; i--) {
    if (NOMINAL.has(tokens[i].pos)) {
      head = i;
      break;
    }
  }
  if (head === -1) head = end - 1;

  for (let i = start; i < end; i++) {
    if (i === head) {
      dep[i] = headDep;
      continue;
    }
    const pos = tokens[i].pos;
    if (pos === "DET") {
      dep[i] = isPossessive(tokens[i].text) ? "poss" : "det";
    } else if (pos === "ADJ") {
      dep[i] = "amod";
    } else if (pos === "NUM") {
      dep[i] = "nummod";
    } else if (pos === "CCONJ") {
      dep[i] = "cc";
    } else {
      dep[i] = i < head ? "compound" : "conj";
    }
  }
  return end;
}

/**
 * Assign one dependency relation per token. Every output tag belongs
 * to the closed dependency set; shapes the rules cannot interpret
 * fall back to the neutral "dep".
 */
export function annotateDependencies(tokens: readonly Token[]): string[] {
  const n = tokens.length;
  const dep: string[] = new Array(n).fill("");
  const lower = tokens.map((t) => t.text.toLowerCase());

  let i = 0;
  let clauseHasVerb = false; // a non-modal verb was seen in this clause
  let rootAssigned = false;
  let inPurpose = false; // past the "so that" connective
  let afterPrep = false; // a preposition awaits its object
  let afterVerb = false; // a verb awaits a direct object
  let lastWasCopula = false;
  let lastWasVerb = false;

  // the story-opening "As a <role>" idiom
  if (
    n > 0 &&
    lower[0] === "as" &&
    (tokens[0].pos === "SCONJ" || tokens[0].pos === "ADP")
  ) {
    dep[0] = "prep";
    i = annotateNounPhrase(tokens, dep, 1, "pobj");
  }

  for (; i < n; i++) {
    if (dep[i] !== "") continue; // already set by a phrase scan
    const pos = tokens[i].pos;
    const word = lower[i];

    // the "so that" purpose connective opens a fresh clause
    if (
      !inPurpose &&
      word === "so" &&
      i + 1 < n &&
      lower[i + 1] === "that"
    ) {
      dep[i] = "mark";
      dep[i + 1] = "mark";
      i++;
      inPurpose = true;
      clauseHasVerb = false;
      afterPrep = false;
      afterVerb = false;
      lastWasCopula = false;
      lastWasVerb = false;
      continue;
    }

    if (pos === "VERB" || pos === "AUX") {
      if (isModal(word)) {
        dep[i] = "aux";
        continue; // a modal precedes its clause verb
      }
      if (lastWasVerb) {
        dep[i] = "xcomp"; // "gets lost", "keep working"
      } else if (afterPrep) {
        dep[i] = "pcomp"; // "to making", "before saving"
      } else if (afterVerb && !clauseHasVerb) {
        dep[i] = "acl"; // participle on a bare nominal
      } else if (!clauseHasVerb) {
        dep[i] = inPurpose || rootAssigned ? "advcl" : "ROOT";
        if (dep[i] === "ROOT") rootAssigned = true;
      } else {
        dep[i] = "conj";
      }
      clauseHasVerb = true;
      afterVerb = true;
      afterPrep = false;
      lastWasCopula = isBeForm(word);
      lastWasVerb = true;
      continue;
    }
    lastWasVerb = false;

    if (pos === "PART") {
      if (word === "to" && i + 1 < n && tokens[i + 1].pos === "VERB") {
        dep[i] = "aux";
        // the infinitival verb reads as a fresh complement, not "conj"
        clauseHasVerb = false;
        lastWasVerb = true;
      } else if (word === "not" || word === "n't") {
        dep[i] = "neg";
      } else {
        dep[i] = "dep";
      }
      continue;
    }

    if (pos === "ADP") {
      dep[i] = "prep";
      afterPrep = true;
      lastWasCopula = false;
      continue;
    }

    if (pos === "PRON") {
      if (!clauseHasVerb && !afterPrep) {
        dep[i] = "nsubj";
      } else if (afterPrep) {
        dep[i] = "pobj";
        afterPrep = false;
      } else if (afterVerb) {
        dep[i] = "dobj";
        afterVerb = false;
      } else {
        dep[i] = "dep";
      }
      continue;
    }

    if (NP_MEMBER.has(pos)) {
      // a lone adjective after a verb is its complement, not a phrase
      const startsPhrase =
        pos !== "ADJ" || (i + 1 < n && NP_MEMBER.has(tokens[i + 1].pos));
      if (pos === "ADJ" && !startsPhrase && (lastWasCopula || afterVerb)) {
        dep[i] = "acomp";
        afterVerb = false;
        lastWasCopula = false;
        continue;
      }
      const headDep = afterPrep
        ? "pobj"
        : !clauseHasVerb
          ? "nsubj"
          : afterVerb
            ? "dobj"
            : "dep";
      const end = annotateNounPhrase(tokens, dep, i, headDep);
      if (end > i) {
        if (afterPrep) afterPrep = false;
        else if (clauseHasVerb && afterVerb) afterVerb = false;
        i = end - 1;
        continue;
      }
      dep[i] = "dep";
      continue;
    }

    if (pos === "ADV") {
      // a particle glued to the verb it follows ("move on", "log in")
      dep[i] = afterVerb && i > 0 && tokens[i - 1].pos === "VERB" ? "prt" : "advmod";
      continue;
    }
    if (pos === "CCONJ") {
      dep[i] = "cc";
      continue;
    }
    if (pos === "SCONJ") {
      dep[i] = "mark";
      continue;
    }
    if (pos === "INTJ") {
      dep[i] = "intj";
      continue;
    }
    dep[i] = "dep";
  }

  return dep.map(inDepSet);
}
