/**
 * Span probability export: one record per (document, span) row with a
 * distribution over the configured class list.
 */

import type { ExportConfig } from "./config.js";
import { DataError, readCorpus, readSpansTsv, writeJsonl } from "./files.js";
import { RandomClassifier } from "./model.js";
import { splitWord } from "./subwords.js";
import { codePoints, tokenize } from "./tokenizer.js";

export interface SpanProbRecord {
  doc_id: string;
  start: number;
  end: number;
  probs: Record<string, number>;
}

export function buildSpanProbRecords(config: ExportConfig): SpanProbRecord[] {
  if (config.classes.length < 2) {
    throw new DataError("span export needs at least two classes");
  }
  if (!config.spans) {
    throw new DataError("config has no spans path");
  }
  const model = new RandomClassifier(config.model, config.classes.length);
  const texts = new Map<string, string[]>();
  for (const doc of readCorpus(config.corpus)) {
    texts.set(doc.docId, codePoints(doc.text));
  }
  const records: SpanProbRecord[] = [];
  for (const row of readSpansTsv(config.spans)) {
    const cps = texts.get(row.docId);
    if (cps === undefined) {
      throw new DataError(`span references unknown document ${row.docId}`);
    }
    if (row.start < 0 || row.end > cps.length) {
      throw new DataError(
        `span [${row.start}, ${row.end}) out of bounds for document ${row.docId} of length ${cps.length}`
      );
    }
    const spanText = cps.slice(row.start, row.end).join("");
    const pieces = tokenize(spanText).flatMap((t) => splitWord(t.text));
    const dist = model.probs(pieces);
    const probs: Record<string, number> = {};
    config.classes.forEach((cls, i) => {
      probs[cls] = dist[i];
    });
    records.push({ doc_id: row.docId, start: row.start, end: row.end, probs });
  }
  return records;
}

export function exportSpanProbs(config: ExportConfig): string {
  if (!config.spanProbsOut) {
    throw new DataError("config has no span_probs_out path");
  }
  writeJsonl(buildSpanProbRecords(config), config.spanProbsOut);
  return config.spanProbsOut;
}
