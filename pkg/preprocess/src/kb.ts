/**
 * Knowledge-base synonym lists: one entity per line,
 * `entity<TAB>name<TAB>name...`, first name canonical.
 */

import { tokenize } from "./nlp.js";

export interface KbIndex {
  /** entity id -> names in file order (canonical first) */
  entities: Map<string, string[]>;
  /** normalized token key -> entity ids that use that phrase */
  phrases: Map<string, string[]>;
  /** longest phrase, in tokens */
  maxPhraseTokens: number;
}

export function normalizeSurface(surface: string): string {
  return surface.trim().replace(/\s+/g, " ").toLowerCase();
}

/** Key used for matching: the phrase's own token stream, normalized. */
export function phraseKey(phrase: string): string {
  return tokenize(phrase).map(normalizeSurface).join(" ");
}

export function parseKb(text: string): KbIndex {
  const entities = new Map<string, string[]>();
  const phrases = new Map<string, string[]>();
  let maxPhraseTokens = 1;
  const lines = text.split("\n");
  for (let lineno = 1; lineno <= lines.length; lineno++) {
    const line = lines[lineno - 1];
    if (!line.trim()) continue;
    const parts = line.replace(/\r$/, "").split("\t");
    const entity = parts[0];
    const names = parts.slice(1).filter((p) => p);
    if (!entity || names.length === 0) {
      throw new Error(`kb line ${lineno}: expected entity<TAB>name...`);
    }
    if (entities.has(entity)) {
      throw new Error(`kb line ${lineno}: duplicate entity '${entity}'`);
    }
    entities.set(entity, names);
    for (const name of names) {
      const key = phraseKey(name);
      if (!key) continue;
      const tokenCount = key.split(" ").length;
      if (tokenCount > maxPhraseTokens) maxPhraseTokens = tokenCount;
      const owners = phrases.get(key);
      if (owners === undefined) {
        phrases.set(key, [entity]);
      } else if (!owners.includes(entity)) {
        owners.push(entity);
      }
    }
  }
  return { entities, phrases, maxPhraseTokens };
}
