/** Corpus and span-file reading, JSONL writing. */

import { mkdirSync, readdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

export class DataError extends Error {}

export interface CorpusDoc {
  docId: string;
  text: string;
}

export interface SpanRow {
  docId: string;
  label?: string;
  start: number;
  end: number;
}

const DOC_PATTERN = /^article(.+)\.txt$/;

export function readCorpus(dir: string): CorpusDoc[] {
  let entries: string[];
  try {
    entries = readdirSync(dir);
  } catch (err) {
    throw new DataError(`cannot read corpus directory ${dir}: ${err}`);
  }
  const docs: CorpusDoc[] = [];
  for (const name of entries.sort()) {
    const match = DOC_PATTERN.exec(name);
    if (!match) {
      continue;
    }
    docs.push({ docId: match[1], text: readFileSync(join(dir, name), "utf-8") });
  }
  docs.sort((a, b) => (a.docId < b.docId ? -1 : a.docId > b.docId ? 1 : 0));
  return docs;
}

/** Rows are doc_id<TAB>[label<TAB>]start<TAB>end. */
export function readSpansTsv(path: string): SpanRow[] {
  const rows: SpanRow[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, idx) => {
    if (!line.trim()) {
      return;
    }
    const fields = line.split("\t");
    let row: SpanRow;
    if (fields.length === 3) {
      row = { docId: fields[0], start: Number(fields[1]), end: Number(fields[2]) };
    } else if (fields.length === 4) {
      row = { docId: fields[0], label: fields[1], start: Number(fields[2]), end: Number(fields[3]) };
    } else {
      throw new DataError(`${path}:${idx + 1}: expected 3 or 4 tab-separated fields`);
    }
    if (!Number.isInteger(row.start) || !Number.isInteger(row.end) || row.end <= row.start) {
      throw new DataError(`${path}:${idx + 1}: bad offsets [${fields.join(", ")}]`);
    }
    rows.push(row);
  });
  return rows;
}

export function writeJsonl(records: object[], path: string): void {
  mkdirSync(dirname(path), { recursive: true });
  const body = records.map((r) => JSON.stringify(r)).join("\n");
  writeFileSync(path, records.length ? body + "\n" : "", "utf-8");
}
