#!/usr/bin/env node
/**
 * spanchain-adapter <export-emissions|export-span-probs> --config <path>
 *
 * Exit codes: 0 success, 2 configuration error, 3 data error.
 */

import { ConfigError, loadConfig } from "./config.js";
import { exportEmissions } from "./emit.js";
import { DataError } from "./files.js";
import { exportSpanProbs } from "./spanprobs.js";

function usage(): void {
  process.stderr.write(
    "usage: spanchain-adapter <export-emissions|export-span-probs> --config <path>\n"
  );
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  let configPath: string | undefined;
  for (let i = 0; i < rest.length; i += 1) {
    if (rest[i] === "--config") {
      configPath = rest[i + 1];
      i += 1;
    } else {
      usage();
      return 2;
    }
  }
  if (!command || !configPath) {
    usage();
    return 2;
  }
  try {
    const config = loadConfig(configPath);
    if (command === "export-emissions") {
      const out = exportEmissions(config);
      process.stdout.write(`wrote ${out}\n`);
    } else if (command === "export-span-probs") {
      const out = exportSpanProbs(config);
      process.stdout.write(`wrote ${out}\n`);
    } else {
      usage();
      return 2;
    }
  } catch (err) {
    if (err instanceof ConfigError) {
      process.stderr.write(`config error: ${err.message}\n`);
      return 2;
    }
    if (err instanceof DataError) {
      process.stderr.write(`data error: ${err.message}\n`);
      return 3;
    }
    throw err;
  }
  return 0;
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
