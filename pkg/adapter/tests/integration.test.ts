/**
 * End-to-end conformance: files exported by this adapter must load through
 * the consumer toolkit's Python loaders with zero validation errors, and a
 * full pipeline run over them must complete.
 */

import { execFileSync } from "node:child_process";
import { existsSync, mkdirSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import { beforeAll, describe, expect, it } from "vitest";

import { parseConfig } from "../src/config.js";
import { exportEmissions } from "../src/emit.js";
import { exportSpanProbs } from "../src/spanprobs.js";
import { codePoints } from "../src/tokenizer.js";

const PYTHON = process.env.PYTHON ?? "python3";
const TAGS = ["O", "B-PROP", "I-PROP"];
const CLASSES = ["Short", "Long", "Repetition"];

let root: string;
let docsDir: string;
let goldPath: string;
let spansPath: string;

function python(args: string[], input?: string): { status: number; stdout: string } {
  try {
    const stdout = execFileSync(PYTHON, args, {
      input,
      encoding: "utf-8",
      stdio: ["pipe", "pipe", "pipe"],
    });
    return { status: 0, stdout };
  } catch (err: any) {
    return { status: err.status ?? 1, stdout: `${err.stdout ?? ""}${err.stderr ?? ""}` };
  }
}

beforeAll(() => {
  root = mkdtempSync(join(tmpdir(), "adapter-integration-"));
  docsDir = join(root, "docs");
  mkdirSync(docsDir, { recursive: true });
  const docs: Record<string, string> = {
    "1": 'He said "it is done". Nothing else happened here today.',
    "2": "Short lines.\nAnother sentence with several plain words follows now \u{1F600} done.",
    "3": "",
  };
  for (const [id, text] of Object.entries(docs)) {
    writeFileSync(join(docsDir, `article${id}.txt`), text, "utf-8");
  }
  // gold spans in code-point offsets; one per non-empty document
  const saidStart = codePoints(docs["1"]).join("").indexOf('"it is done"');
  const gold = [
    `1\tPROP\t${saidStart}\t${saidStart + codePoints('"it is done"').length}`,
    "2\tPROP\t0\t5",
  ];
  goldPath = join(root, "gold.tsv");
  writeFileSync(goldPath, gold.join("\n") + "\n", "utf-8");
  const spans = [
    `1\tShort\t${saidStart}\t${saidStart + 3}`,
    `1\tLong\t${saidStart}\t${saidStart + 12}`,
    "2\tRepetition\t0\t5",
  ];
  spansPath = join(root, "spans.tsv");
  writeFileSync(spansPath, spans.join("\n") + "\n", "utf-8");
});

function adapterConfig(extra: object = {}) {
  return parseConfig({
    model: { type: "random", dim: 12, seed: 42 },
    corpus: docsDir,
    aggregation: "first-subtoken",
    tag_order: TAGS,
    classes: CLASSES,
    spans: spansPath,
    ...extra,
  });
}

describe("primary-toolkit conformance", () => {
  it("exported emissions load with zero validation errors", () => {
    const out = join(root, "emissions.jsonl");
    exportEmissions(adapterConfig({ emissions_out: out }));
    const check = python(
      ["-c",
        [
          "import sys",
          "from spanchain.emitters import load_emissions",
          `records = load_emissions(${JSON.stringify(out)})`,
          "assert len(records) == 3, len(records)",
          "assert sorted(r.doc_id for r in records) == ['1', '2', '3']",
          "assert records[2].n_tokens == 0 or records[0].n_tokens >= 0",
          "print('ok', sum(r.n_tokens for r in records))",
        ].join("\n"),
      ]
    );
    expect(check.stdout).toContain("ok");
    expect(check.status).toBe(0);
  });

  it("exported span probabilities load with zero validation errors", () => {
    const out = join(root, "probs.jsonl");
    exportSpanProbs(adapterConfig({ span_probs_out: out }));
    const check = python(
      ["-c",
        [
          "from spanchain.emitters import load_span_probs",
          `records = load_span_probs(${JSON.stringify(out)})`,
          "assert len(records) == 3, len(records)",
          "assert all(abs(sum(r.probs.values()) - 1) <= 1e-6 for r in records)",
          "print('ok')",
        ].join("\n"),
      ]
    );
    expect(check.stdout).toContain("ok");
    expect(check.status).toBe(0);
  });

  it("a full identification pipeline run completes over exported emissions", () => {
    const emissions = join(root, "pipe_emissions.jsonl");
    exportEmissions(adapterConfig({ emissions_out: emissions }));
    const outDir = join(root, "pipeline_out");
    const configPath = join(root, "pipeline.json");
    writeFileSync(
      configPath,
      JSON.stringify({
        task: "identification",
        scheme: "BIO",
        corpus: { documents: docsDir, annotations: goldPath },
        emissions: [emissions],
        stages: { punct_fix: true },
        out: outDir,
      }),
      "utf-8"
    );
    const run = python(["-m", "spanchain.cli", "pipeline", "--config", configPath]);
    expect(run.status).toBe(0);
    const report = readFileSync(join(outDir, "report.tsv"), "utf-8");
    expect(report).toContain("span_f1\t");
    expect(existsSync(join(outDir, "predictions.tsv"))).toBe(true);
  });

  it("a full classification pipeline run completes over exported span probabilities", () => {
    const probs = join(root, "cls_probs.jsonl");
    exportSpanProbs(adapterConfig({ span_probs_out: probs }));
    const outDir = join(root, "classify_out");
    const configPath = join(root, "classify.json");
    writeFileSync(
      configPath,
      JSON.stringify({
        task: "classification",
        source: "file",
        span_probs: probs,
        corpus: { documents: docsDir, annotations: spansPath },
        stages: { repetition: true, multilabel: true },
        out: outDir,
      }),
      "utf-8"
    );
    const run = python(["-m", "spanchain.cli", "pipeline", "--config", configPath]);
    expect(run.status).toBe(0);
    const report = readFileSync(join(outDir, "report.tsv"), "utf-8");
    expect(report).toContain("micro_f1\t");
  });

  it("the built CLI exports the same files", () => {
    const cliPath = resolve(__dirname, "..", "dist", "cli.js");
    if (!existsSync(cliPath)) {
      throw new Error("dist/cli.js missing; run `npm run build` before the tests");
    }
    const direct = join(root, "direct.jsonl");
    exportEmissions(adapterConfig({ emissions_out: direct }));
    const viaCli = join(root, "via_cli.jsonl");
    const configPath = join(root, "cli_config.json");
    writeFileSync(
      configPath,
      JSON.stringify({
        model: { type: "random", dim: 12, seed: 42 },
        corpus: docsDir,
        aggregation: "first-subtoken",
        tag_order: TAGS,
        classes: CLASSES,
        emissions_out: viaCli,
      }),
      "utf-8"
    );
    execFileSync("node", [cliPath, "export-emissions", "--config", configPath], { encoding: "utf-8" });
    expect(readFileSync(viaCli, "utf-8")).toBe(readFileSync(direct, "utf-8"));
  });
});
