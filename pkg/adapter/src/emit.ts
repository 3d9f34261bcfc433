/**
 * Emission export: runs the classifier over subword pieces and aggregates
 * piece log-scores onto the word tokens the consumer toolkit expects.
 *
 * first-subtoken aggregation copies the first piece's row (continuation
 * pieces are ignored); mean aggregation averages all piece rows.
 */

import type { ExportConfig } from "./config.js";
import { DataError, readCorpus, writeJsonl } from "./files.js";
import { RandomClassifier } from "./model.js";
import { reassemble, splitWord } from "./subwords.js";
import { tokenize } from "./tokenizer.js";

export class AlignmentError extends DataError {}

export interface EmissionRecord {
  doc_id: string;
  tag_order: string[];
  tokens: { text: string; start: number; end: number }[];
  scores: number[][];
}

export function checkAlignment(docId: string, offset: number, token: string, pieces: string[]): void {
  if (reassemble(pieces) !== token) {
    throw new AlignmentError(
      `subword pieces do not reassemble token in document ${docId} at offset ${offset}: ` +
        `${JSON.stringify(pieces)} vs ${JSON.stringify(token)}`
    );
  }
}

export function aggregate(rows: number[][], mode: "first-subtoken" | "mean"): number[] {
  if (rows.length === 0) {
    throw new DataError("cannot aggregate zero subword rows");
  }
  if (mode === "first-subtoken") {
    return [...rows[0]];
  }
  const out = new Array(rows[0].length).fill(0);
  for (const row of rows) {
    row.forEach((v, i) => {
      out[i] += v;
    });
  }
  return out.map((v) => v / rows.length);
}

export function buildEmissionRecords(config: ExportConfig): EmissionRecord[] {
  if (config.tagOrder.length === 0) {
    throw new DataError("emission export needs a non-empty tag_order");
  }
  const model = new RandomClassifier(config.model, config.tagOrder.length);
  const records: EmissionRecord[] = [];
  for (const doc of readCorpus(config.corpus)) {
    const tokens = tokenize(doc.text);
    const scores: number[][] = [];
    for (const token of tokens) {
      const pieces = splitWord(token.text);
      checkAlignment(doc.docId, token.start, token.text, pieces);
      const rows = pieces.map((p) => model.logScores(p));
      scores.push(aggregate(rows, config.aggregation));
    }
    records.push({
      doc_id: doc.docId,
      tag_order: [...config.tagOrder],
      tokens: tokens.map((t) => ({ text: t.text, start: t.start, end: t.end })),
      scores,
    });
  }
  return records;
}

export function exportEmissions(config: ExportConfig): string {
  if (!config.emissionsOut) {
    throw new DataError("config has no emissions_out path");
  }
  writeJsonl(buildEmissionRecords(config), config.emissionsOut);
  return config.emissionsOut;
}
