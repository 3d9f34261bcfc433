/** Export configuration loading and validation. */

import { readFileSync } from "node:fs";

import type { ModelSpec } from "./model.js";

export type Aggregation = "first-subtoken" | "mean";

export interface ExportConfig {
  model: ModelSpec;
  corpus: string;
  aggregation: Aggregation;
  tagOrder: string[];
  classes: string[];
  spans?: string;
  emissionsOut?: string;
  spanProbsOut?: string;
}

export class ConfigError extends Error {}

export function parseConfig(obj: any): ExportConfig {
  if (typeof obj !== "object" || obj === null) {
    throw new ConfigError("config root must be an object");
  }
  const model = obj.model ?? { type: "random", dim: 16, seed: 0 };
  if (model.type !== "random") {
    throw new ConfigError(`unknown model type ${JSON.stringify(model.type)}`);
  }
  const dim = Number(model.dim ?? 16);
  const seed = Number(model.seed ?? 0);
  if (!Number.isInteger(dim) || dim < 1) {
    throw new ConfigError(`model.dim must be a positive integer, got ${model.dim}`);
  }
  if (!obj.corpus || typeof obj.corpus !== "string") {
    throw new ConfigError("config needs a corpus directory path");
  }
  const aggregation = obj.aggregation ?? "first-subtoken";
  if (aggregation !== "first-subtoken" && aggregation !== "mean") {
    throw new ConfigError(`aggregation must be "first-subtoken" or "mean", got ${aggregation}`);
  }
  const tagOrder = obj.tag_order ?? [];
  const classes = obj.classes ?? [];
  if (!Array.isArray(tagOrder) || tagOrder.some((t: any) => typeof t !== "string")) {
    throw new ConfigError("tag_order must be a list of strings");
  }
  if (!Array.isArray(classes) || classes.some((c: any) => typeof c !== "string")) {
    throw new ConfigError("classes must be a list of strings");
  }
  return {
    model: { type: "random", dim, seed },
    corpus: obj.corpus,
    aggregation,
    tagOrder,
    classes,
    spans: obj.spans,
    emissionsOut: obj.emissions_out,
    spanProbsOut: obj.span_probs_out,
  };
}

export function loadConfig(path: string): ExportConfig {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw new ConfigError(`cannot read config file ${path}: ${err}`);
  }
  let obj: any;
  try {
    obj = JSON.parse(raw);
  } catch (err) {
    throw new ConfigError(`${path}: invalid JSON: ${err}`);
  }
  return parseConfig(obj);
}
