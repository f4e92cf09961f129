#!/usr/bin/env node
/**
 * Command line front end.
 *
 *   syndisc-preprocess annotate --in docs.jsonl --kb kb.tsv --out corpus.jsonl
 *                               [--policy frequent|first] [--report report.json]
 *   syndisc-preprocess verify --corpus corpus.jsonl [--json]
 *
 * Exit codes: 0 success, 1 usage error, 2 bad input data.
 */

import { readdirSync, readFileSync, statSync, writeFileSync } from "node:fs";
import { basename, join } from "node:path";
import process from "node:process";

import { annotateCorpus } from "./annotate.js";
import { parseKb } from "./kb.js";
import { verifyCorpus } from "./verify.js";
import type { LinkPolicy, RawDocument } from "./types.js";

const USAGE = `usage:
  syndisc-preprocess annotate --in <docs.jsonl|dir> --kb <kb.tsv> --out <corpus.jsonl> [--policy frequent|first] [--report <report.json>]
  syndisc-preprocess verify --corpus <corpus.jsonl> [--json]`;

function parseFlags(argv: string[], flags: Record<string, "value" | "switch">): Record<string, string | boolean> {
  const out: Record<string, string | boolean> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const kind = flags[arg];
    if (kind === undefined) throw new Error(`unknown argument '${arg}'`);
    if (kind === "switch") {
      out[arg] = true;
    } else {
      const value = argv[++i];
      if (value === undefined) throw new Error(`${arg} needs a value`);
      out[arg] = value;
    }
  }
  return out;
}

function readDocuments(input: string): RawDocument[] {
  if (statSync(input).isDirectory()) {
    const docs: RawDocument[] = [];
    for (const name of readdirSync(input).sort()) {
      if (!name.endsWith(".txt")) continue;
      docs.push({
        doc_id: basename(name, ".txt"),
        body: readFileSync(join(input, name), "utf-8"),
      });
    }
    return docs;
  }
  const docs: RawDocument[] = [];
  const text = readFileSync(input, "utf-8");
  const lines = text.split("\n");
  for (let lineno = 1; lineno <= lines.length; lineno++) {
    if (!lines[lineno - 1].trim()) continue;
    let rec: any;
    try {
      rec = JSON.parse(lines[lineno - 1]);
    } catch {
      throw new Error(`${input} line ${lineno}: not valid JSON`);
    }
    docs.push({ doc_id: rec.doc_id, body: String(rec.body ?? "") });
  }
  return docs;
}

function cmdAnnotate(argv: string[]): number {
  const opts = parseFlags(argv, {
    "--in": "value",
    "--kb": "value",
    "--out": "value",
    "--policy": "value",
    "--report": "value",
  });
  const input = opts["--in"];
  const kbPath = opts["--kb"];
  const outPath = opts["--out"];
  if (typeof input !== "string" || typeof kbPath !== "string" || typeof outPath !== "string") {
    throw new Error("annotate requires --in, --kb and --out");
  }
  const policy = (opts["--policy"] ?? "frequent") as string;
  if (policy !== "frequent" && policy !== "first") {
    throw new Error(`--policy must be 'frequent' or 'first', not '${policy}'`);
  }

  const kb = parseKb(readFileSync(kbPath, "utf-8"));
  const docs = readDocuments(input);
  const { records, report } = annotateCorpus(docs, kb, policy as LinkPolicy);

  const body = records.map((r) => JSON.stringify(r)).join("\n");
  writeFileSync(outPath, body.length ? body + "\n" : "");
  if (typeof opts["--report"] === "string") {
    writeFileSync(opts["--report"], JSON.stringify(report, null, 2) + "\n");
  }
  process.stderr.write(
    `annotated ${report.annotated}/${report.documents} documents: ` +
      `${report.sentences} sentences, ${report.linked_mentions} linked mentions` +
      (report.skipped.length ? `, skipped ${report.skipped.length}` : "") +
      "\n",
  );
  for (const s of report.skipped) {
    process.stderr.write(`  skipped ${s.doc_id}: ${s.reason}\n`);
  }
  return 0;
}

function cmdVerify(argv: string[]): number {
  const opts = parseFlags(argv, { "--corpus": "value", "--json": "switch" });
  const corpus = opts["--corpus"];
  if (typeof corpus !== "string") throw new Error("verify requires --corpus");
  const report = verifyCorpus(readFileSync(corpus, "utf-8").split("\n"));
  if (opts["--json"]) {
    process.stdout.write(JSON.stringify(report, null, 2) + "\n");
  } else {
    process.stdout.write(
      `sentences=${report.sentences} tokens=${report.tokens} ` +
        `mentions=${report.mentions} linked_mentions=${report.linked_mentions} ` +
        `violations=${report.violations.length}\n`,
    );
    for (const v of report.violations) {
      process.stdout.write(`  ${v.where}: ${v.problem}\n`);
    }
  }
  return report.violations.length === 0 ? 0 : 2;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "annotate") return cmdAnnotate(rest);
    if (command === "verify") return cmdVerify(rest);
    process.stderr.write(USAGE + "\n");
    return command === undefined || command === "--help" || command === "-h" ? 0 : 1;
  } catch (err) {
    const msg = err instanceof Error ? err.message : String(err);
    process.stderr.write(`error: ${msg}\n`);
    return msg.startsWith("unknown argument") || msg.includes("requires") || msg.includes("must be")
      ? 1
      : 2;
  }
}

if (process.argv[1] && /cli\.(js|ts)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
