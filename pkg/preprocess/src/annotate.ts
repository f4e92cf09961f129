/**
 * Turn raw documents into annotated sentence records with entity mentions.
 *
 * Mentions come from longest-match dictionary lookup against the KB name
 * list, scanning left to right; an accepted match consumes its tokens, so
 * spans never overlap.  When a name belongs to several entities the link
 * is chosen by policy and the losing candidates are reported.
 */

import { annotateSentence, splitSentences } from "./nlp.js";
import { normalizeSurface, type KbIndex } from "./kb.js";
import type {
  AlternativeLink,
  AnnotateReport,
  LinkPolicy,
  RawDocument,
  SentenceRecord,
  Token,
} from "./types.js";

interface Match {
  start: number;
  end: number;
  surface: string;
  candidates: string[];
}

function findMatches(surfaces: string[], kb: KbIndex): Match[] {
  const norm = surfaces.map(normalizeSurface);
  const out: Match[] = [];
  let i = 0;
  while (i < surfaces.length) {
    let hit: Match | null = null;
    const cap = Math.min(kb.maxPhraseTokens, surfaces.length - i);
    for (let len = cap; len >= 1; len--) {
      const key = norm.slice(i, i + len).join(" ");
      const owners = kb.phrases.get(key);
      if (owners !== undefined) {
        hit = {
          start: i,
          end: i + len,
          surface: surfaces.slice(i, i + len).join(" "),
          candidates: owners,
        };
        break;
      }
    }
    if (hit) {
      out.push(hit);
      i = hit.end;
    } else {
      i++;
    }
  }
  return out;
}

interface AnnotatedDoc {
  records: SentenceRecord[];
  alternatives: AlternativeLink[];
}

function annotateDocument(
  doc: RawDocument,
  kb: KbIndex,
  policy: LinkPolicy,
): AnnotatedDoc {
  const sentences = splitSentences(doc.body);
  const parsed: { tokens: Token[]; matches: Match[] }[] = [];
  const unambiguous = new Map<string, number>();
  for (const sentence of sentences) {
    const tokens = annotateSentence(sentence);
    const matches = findMatches(tokens.map((t) => t.surface), kb);
    for (const m of matches) {
      if (m.candidates.length === 1) {
        unambiguous.set(m.candidates[0], (unambiguous.get(m.candidates[0]) ?? 0) + 1);
      }
    }
    parsed.push({ tokens, matches });
  }

  const pick = (candidates: string[]): string => {
    if (policy === "first" || candidates.length === 1) return candidates[0];
    let best = candidates[0];
    let bestCount = unambiguous.get(best) ?? 0;
    for (const c of candidates.slice(1)) {
      const count = unambiguous.get(c) ?? 0;
      if (count > bestCount || (count === bestCount && c < best)) {
        best = c;
        bestCount = count;
      }
    }
    return best;
  };

  const records: SentenceRecord[] = [];
  const alternatives: AlternativeLink[] = [];
  for (let sentId = 0; sentId < parsed.length; sentId++) {
    const { tokens, matches } = parsed[sentId];
    const mentions: [number, number, string | null][] = [];
    for (const m of matches) {
      const chosen = pick(m.candidates);
      mentions.push([m.start, m.end, chosen]);
      if (m.candidates.length > 1) {
        alternatives.push({
          doc_id: doc.doc_id,
          sent_id: sentId,
          start: m.start,
          end: m.end,
          surface: m.surface,
          candidates: [...m.candidates],
          chosen,
        });
      }
    }
    records.push({
      version: 1,
      doc_id: doc.doc_id,
      sent_id: sentId,
      tokens: tokens.map((t) => [t.surface, t.pos, t.head, t.deprel]),
      mentions,
    });
  }
  return { records, alternatives };
}

export interface AnnotateResult {
  records: SentenceRecord[];
  report: AnnotateReport;
}

export function annotateCorpus(
  docs: RawDocument[],
  kb: KbIndex,
  policy: LinkPolicy = "frequent",
): AnnotateResult {
  const report: AnnotateReport = {
    documents: docs.length,
    annotated: 0,
    skipped: [],
    sentences: 0,
    tokens: 0,
    mentions: 0,
    linked_mentions: 0,
    alternatives: [],
  };
  const records: SentenceRecord[] = [];
  for (const doc of docs) {
    let result: AnnotatedDoc;
    try {
      if (typeof doc.doc_id !== "string" || !doc.doc_id) {
        throw new Error("missing doc_id");
      }
      result = annotateDocument(doc, kb, policy);
    } catch (err) {
      report.skipped.push({
        doc_id: String(doc.doc_id ?? "<unknown>"),
        reason: err instanceof Error ? err.message : String(err),
      });
      continue;
    }
    report.annotated++;
    records.push(...result.records);
    report.alternatives.push(...result.alternatives);
    for (const rec of result.records) {
      report.sentences++;
      report.tokens += rec.tokens.length;
      report.mentions += rec.mentions.length;
      report.linked_mentions += rec.mentions.filter((m) => m[2] !== null).length;
    }
  }
  records.sort((a, b) =>
    a.doc_id < b.doc_id ? -1 : a.doc_id > b.doc_id ? 1 : a.sent_id - b.sent_id,
  );
  return { records, report };
}
