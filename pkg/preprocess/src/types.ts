export type RawDocument = {
  doc_id: string;
  body: string;
};

export type Token = {
  surface: string;
  pos: string;
  head: number; // 0-based index of the head token, -1 for the root
  deprel: string;
};

export type MentionSpan = {
  start: number; // token index, inclusive
  end: number; // token index, exclusive
  entity: string | null;
};

export type SentenceRecord = {
  version: 1;
  doc_id: string;
  sent_id: number;
  tokens: [string, string, number, string][];
  mentions: [number, number, string | null][];
};

export type LinkPolicy = "frequent" | "first";

/** An ambiguous surface and the entities that claimed it. */
export type AlternativeLink = {
  doc_id: string;
  sent_id: number;
  start: number;
  end: number;
  surface: string;
  candidates: string[];
  chosen: string;
};

export type AnnotateReport = {
  documents: number;
  annotated: number;
  skipped: { doc_id: string; reason: string }[];
  sentences: number;
  tokens: number;
  mentions: number;
  linked_mentions: number;
  alternatives: AlternativeLink[];
};
