/**
 * Built-in deterministic annotators: sentence splitting, tokenization,
 * POS tagging, and dependency head assignment.
 *
 * These stand in for an external NLP toolkit so the adapter runs with no
 * models or network.  The head assigner is acyclic by construction: apart
 * from the root, every edge either points forward to a noun or backward
 * out of a punctuation token, and forward edges never land on punctuation,
 * so no cycle can close.
 */

import type { Token } from "./types.js";

const MAX_SENTENCE_TOKENS = 512;

const ABBREVIATIONS = new Set([
  "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "inc",
  "ltd", "co", "no", "e.g", "i.e",
]);

export function splitSentences(body: string): string[] {
  const out: string[] = [];
  for (const para of body.split(/\n\s*\n/)) {
    const text = para.replace(/\s+/g, " ").trim();
    if (!text) continue;
    let start = 0;
    const boundary = /[.!?]+[)"']?\s+(?=["'(]?[A-Z0-9])/g;
    let m: RegExpExecArray | null;
    while ((m = boundary.exec(text)) !== null) {
      const endOfMark = m.index + m[0].trimEnd().length;
      const before = text.slice(start, m.index);
      const lastWord = before.split(/\s+/).pop() ?? "";
      const bare = lastWord.toLowerCase().replace(/\.+$/, "");
      // "Mr.", "J." and similar do not end a sentence
      if (ABBREVIATIONS.has(bare) || /^[A-Z]$/.test(lastWord)) continue;
      out.push(text.slice(start, endOfMark).trim());
      start = m.index + m[0].length;
    }
    const tail = text.slice(start).trim();
    if (tail) out.push(tail);
  }
  return out;
}

const TOKEN_RE = /[A-Za-z0-9]+(?:['’\-][A-Za-z0-9]+)*|[^\sA-Za-z0-9]/g;

export function tokenize(sentence: string): string[] {
  const tokens = sentence.match(TOKEN_RE) ?? [];
  if (tokens.length > MAX_SENTENCE_TOKENS) {
    throw new Error(`sentence exceeds ${MAX_SENTENCE_TOKENS} tokens`);
  }
  return tokens;
}

// ------------------------------------------------------------------ tagging

const CLOSED_CLASS: Record<string, string> = {
  the: "DT", a: "DT", an: "DT", this: "DT", that: "DT", these: "DT",
  those: "DT", some: "DT", any: "DT", each: "DT", every: "DT",
  of: "IN", in: "IN", on: "IN", at: "IN", by: "IN", from: "IN", to: "IN",
  with: "IN", as: "IN", for: "IN", into: "IN", near: "IN", after: "IN",
  before: "IN", under: "IN", over: "IN", about: "IN",
  and: "CC", or: "CC", but: "CC", nor: "CC",
  he: "PRP", she: "PRP", it: "PRP", they: "PRP", we: "PRP", i: "PRP",
  you: "PRP", him: "PRP", her: "PRP", them: "PRP", us: "PRP",
  his: "PRP$", its: "PRP$", their: "PRP$", our: "PRP$", my: "PRP$",
  not: "RB", also: "RB", very: "RB", only: "RB", commonly: "RB",
  can: "MD", could: "MD", will: "MD", would: "MD", may: "MD", might: "MD",
  must: "MD", shall: "MD", should: "MD",
  is: "VBZ", are: "VBP", was: "VBD", were: "VBD", be: "VB", been: "VBN",
  being: "VBG", am: "VBP", has: "VBZ", have: "VBP", had: "VBD", do: "VBP",
  does: "VBZ", did: "VBD",
  who: "WP", what: "WP", which: "WDT", when: "WRB", where: "WRB",
};

const BE_TAGS = new Set(["VBZ", "VBP", "VBD", "VB", "VBN", "VBG", "MD"]);

const COMMON_ADJECTIVES = new Set([
  "old", "new", "big", "small", "large", "wide", "great", "good", "bad",
  "high", "low", "long", "short", "early", "late", "young", "major", "own",
]);

function tagWord(surface: string, index: number, prevTag: string): string {
  if (!/[A-Za-z0-9]/.test(surface)) return surface; // punctuation tags itself
  const lower = surface.toLowerCase();
  const closed = CLOSED_CLASS[lower];
  if (closed) return closed;
  if (/^\d/.test(surface)) return "CD";
  if (/^[A-Z]/.test(surface) && index > 0) return "NNP";
  if (lower.endsWith("ly")) return "RB";
  if (lower.endsWith("ing") && lower.length > 4) return "VBG";
  if (lower.endsWith("ed") && lower.length > 3) {
    // passive/perfect after an auxiliary, plain past otherwise
    return BE_TAGS.has(prevTag) || prevTag === "RB" ? "VBN" : "VBD";
  }
  if (
    COMMON_ADJECTIVES.has(lower) ||
    lower.endsWith("able") || lower.endsWith("ous") || lower.endsWith("ful")
  ) {
    return "JJ";
  }
  if (lower.endsWith("s") && !lower.endsWith("ss") && lower.length > 3) {
    return "NNS";
  }
  return "NN";
}

export function tagTokens(surfaces: string[]): string[] {
  const tags: string[] = [];
  let prevWordTag = "";
  for (let i = 0; i < surfaces.length; i++) {
    const tag = tagWord(surfaces[i], i, prevWordTag);
    tags.push(tag);
    if (/[A-Za-z0-9]/.test(surfaces[i]) && tag !== "RB") prevWordTag = tag;
  }
  return tags;
}

// ------------------------------------------------------------------ parsing

const NOUN_TAGS = new Set(["NN", "NNS", "NNP", "NNPS"]);
const VERB_TAGS = new Set(["VB", "VBZ", "VBP", "VBD", "VBN", "VBG", "MD"]);

function nextNoun(tags: string[], from: number, limit: number): number {
  for (let j = from + 1; j <= Math.min(from + limit, tags.length - 1); j++) {
    if (NOUN_TAGS.has(tags[j])) return j;
  }
  return -1;
}

/** Assign heads and relations.  Exactly one root; the result is a tree. */
export function assignHeads(surfaces: string[], tags: string[]): Token[] {
  const n = surfaces.length;
  let root = tags.findIndex((t) => VERB_TAGS.has(t));
  if (root < 0) root = 0;

  const tokens: Token[] = [];
  let sawRootVerb = false;
  let sawObject = false;
  for (let i = 0; i < n; i++) {
    const tag = tags[i];
    if (i === root) {
      tokens.push({ surface: surfaces[i], pos: tag, head: -1, deprel: "root" });
      sawRootVerb = true;
      continue;
    }
    let head = root;
    let deprel = "dep";
    const noun = nextNoun(tags, i, 3);
    if (!/[A-Za-z0-9]/.test(surfaces[i])) {
      // punctuation hangs off the previous non-punctuation token
      let prev = i - 1;
      while (prev >= 0 && !/[A-Za-z0-9]/.test(surfaces[prev])) prev--;
      head = prev >= 0 ? prev : root;
      deprel = "punct";
    } else if (tag === "DT" && noun > i) {
      head = noun;
      deprel = "det";
    } else if ((tag === "JJ" || tag === "PRP$") && noun > i) {
      head = noun;
      deprel = tag === "JJ" ? "amod" : "nmod:poss";
    } else if (tag === "CD" && noun > i) {
      head = noun;
      deprel = "nummod";
    } else if (tag === "IN" && noun > i) {
      head = noun;
      deprel = "case";
    } else if (tag === "NNP" && noun > i && tags[noun] === "NNP") {
      head = noun;
      deprel = "compound";
    } else if (NOUN_TAGS.has(tag) || tag === "PRP") {
      if (i < root) {
        deprel = "nsubj";
      } else if (!sawObject && sawRootVerb) {
        deprel = "dobj";
        sawObject = true;
      } else {
        deprel = "nmod";
      }
    } else if (tag === "RB") {
      deprel = "advmod";
    } else if (VERB_TAGS.has(tag)) {
      deprel = i < root ? "aux" : "xcomp";
    } else if (tag === "CC") {
      deprel = "cc";
    }
    if (head === i) head = root === i ? -1 : root; // safety, unreachable
    tokens.push({ surface: surfaces[i], pos: tag, head, deprel });
  }
  return tokens;
}

export function annotateSentence(sentence: string): Token[] {
  const surfaces = tokenize(sentence);
  return assignHeads(surfaces, tagTokens(surfaces));
}
