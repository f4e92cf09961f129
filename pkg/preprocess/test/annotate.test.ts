import { describe, expect, it } from "vitest";

import {
  annotateCorpus,
  annotateSentence,
  parseKb,
  phraseKey,
  splitSentences,
  tokenize,
} from "../dist/index.js";

const KB_USA = parseKb("E_usa\tUnited States of America\tAmerica\n");

describe("splitSentences", () => {
  it("splits on terminal punctuation before a capital", () => {
    const body = "The capital is large. It sits on a river.\n\nTrade grew fast.";
    expect(splitSentences(body)).toEqual([
      "The capital is large.",
      "It sits on a river.",
      "Trade grew fast.",
    ]);
  });

  it("does not split after honorifics or initials", () => {
    const body = "Dr. Smith met J. Jones. They talked.";
    expect(splitSentences(body)).toEqual(["Dr. Smith met J. Jones.", "They talked."]);
  });

  it("returns nothing for blank input", () => {
    expect(splitSentences("  \n\n  ")).toEqual([]);
  });
});

describe("tokenize", () => {
  it("keeps hyphenated and apostrophe words whole, isolates punctuation", () => {
    expect(tokenize("It's a state-of-the-art mill, truly.")).toEqual([
      "It's", "a", "state-of-the-art", "mill", ",", "truly", ".",
    ]);
  });

  it("rejects sentences past the token cap", () => {
    const huge = Array(513).fill("word").join(" ");
    expect(() => tokenize(huge)).toThrow(/512/);
  });
});

describe("annotateSentence", () => {
  const sentences = [
    "The United States of America is commonly referred to as America.",
    "Hello",
    "...",
    "In 1905 the old mill on the river burned down, and 300 workers left.",
    'He said , "wait" - then left.',
  ];

  it.each(sentences)("produces a single-rooted acyclic tree: %s", (sentence) => {
    const tokens = annotateSentence(sentence);
    const n = tokens.length;
    expect(tokens.filter((t) => t.head === -1)).toHaveLength(1);
    for (let i = 0; i < n; i++) {
      const t = tokens[i];
      if (t.head === -1) continue;
      expect(t.head).toBeGreaterThanOrEqual(0);
      expect(t.head).toBeLessThan(n);
      expect(t.head).not.toBe(i);
    }
    for (let i = 0; i < n; i++) {
      let j = i;
      let steps = 0;
      while (tokens[j].head !== -1) {
        j = tokens[j].head;
        steps++;
        expect(steps).toBeLessThanOrEqual(n);
      }
    }
  });

  it("attaches determiners and adjectives to a following noun", () => {
    const tokens = annotateSentence("The old mill burned.");
    expect(tokens[0]).toMatchObject({ pos: "DT", head: 2, deprel: "det" });
    expect(tokens[1]).toMatchObject({ head: 2, deprel: "amod" });
    expect(tokens[3]).toMatchObject({ head: -1, deprel: "root" });
  });
});

describe("entity linking", () => {
  const doc = (doc_id: string, body: string) => ({ doc_id, body });

  it("links the worked example twice to the same entity", () => {
    const { records, report } = annotateCorpus(
      [doc("d1", "The United States of America is commonly referred to as America.")],
      KB_USA,
    );
    expect(records).toHaveLength(1);
    expect(records[0].mentions).toEqual([
      [1, 5, "E_usa"],
      [10, 11, "E_usa"],
    ]);
    expect(report.linked_mentions).toBe(2);
    expect(report.alternatives).toEqual([]);
  });

  it("leaves sentences without dictionary hits unlinked", () => {
    const { records } = annotateCorpus([doc("d1", "Nothing matches here.")], KB_USA);
    expect(records[0].mentions).toEqual([]);
  });

  it("prefers the longest phrase at each position", () => {
    const kb = parseKb("E_ny\tNew York\nE_nyc\tNew York City\n");
    const { records } = annotateCorpus([doc("d1", "He visited New York City today.")], kb);
    expect(records[0].mentions).toEqual([[2, 5, "E_nyc"]]);
  });

  it("matches names through its own tokenizer", () => {
    expect(phraseKey("U.S.")).toBe("u . s .");
    const kb = parseKb("E_usa\tU.S.\n");
    const { records } = annotateCorpus([doc("d1", "Farms across the U.S. grew corn.")], kb);
    expect(records[0].mentions).toEqual([[3, 7, "E_usa"]]);
  });

  it("resolves shared names by document frequency, or file order under --policy first", () => {
    const kb = parseKb("E_state\tGeorgia\tPeach State\nE_country\tGeorgia\tSakartvelo\n");
    const body = "Sakartvelo exports wine. Georgia is small.";
    const frequent = annotateCorpus([doc("d1", body)], kb, "frequent");
    expect(frequent.records[1].mentions).toEqual([[0, 1, "E_country"]]);
    expect(frequent.report.alternatives).toHaveLength(1);
    expect(frequent.report.alternatives[0]).toMatchObject({
      surface: "Georgia",
      candidates: ["E_state", "E_country"],
      chosen: "E_country",
    });

    const first = annotateCorpus([doc("d1", body)], kb, "first");
    expect(first.records[1].mentions).toEqual([[0, 1, "E_state"]]);
  });

  it("skips documents that fail and keeps going", () => {
    const runaway = Array(600).fill("word").join(" "); // no boundary => one huge sentence
    const { records, report } = annotateCorpus(
      [doc("bad", runaway), doc("good", "America is large.")],
      KB_USA,
    );
    expect(report.documents).toBe(2);
    expect(report.annotated).toBe(1);
    expect(report.skipped).toHaveLength(1);
    expect(report.skipped[0].doc_id).toBe("bad");
    expect(report.skipped[0].reason).toMatch(/512/);
    expect(records.every((r) => r.doc_id === "good")).toBe(true);
  });

  it("orders output by document id then sentence id", () => {
    const { records } = annotateCorpus(
      [doc("zz", "America first. America second."), doc("aa", "America here.")],
      KB_USA,
    );
    expect(records.map((r) => [r.doc_id, r.sent_id])).toEqual([
      ["aa", 0],
      ["zz", 0],
      ["zz", 1],
    ]);
  });
});

describe("parseKb", () => {
  it("rejects duplicate entities and empty name lists", () => {
    expect(() => parseKb("E1\tname\nE1\tother\n")).toThrow(/duplicate/);
    expect(() => parseKb("E1\n")).toThrow(/entity<TAB>name/);
  });
});
