#!/usr/bin/env node
/**
 * Command line for the bridge, mirroring the Python toolkit's
 * conventions: subcommands, --flag arguments, and exit codes
 * 0 (success) / 2 (usage) / 3 (data or format) / 4 (numeric).
 *
 *   embalign-bridge export-visual --images a.png b.png --out v.emb1
 *   embalign-bridge export-textual --classes happy,sad --out t.emb1
 *   embalign-bridge export-targets --images a.png --out g.emb1
 *   embalign-bridge inspect v.emb1
 */
import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { SpaceTag, StoreFormatError, storeFromBytes, storeToBytes } from "./emb1.js";
import {
  BridgeConfigError,
  Encoder,
  ImageInput,
  VisionBackbone,
  defaultConfig,
} from "./encoder.js";
import {
  ExportError,
  exportLlmTargets,
  exportTextual,
  exportVisual,
} from "./export.js";
import { StubEncoder } from "./stub.js";

const USAGE = `usage: embalign-bridge <command> [flags]

commands:
  export-visual   --images <file...> --out <file> [--backbone B32|B16|L14]
                  [--backend stub|transformers] [--group <id>]
  export-textual  --classes <a,b,...> --out <file> [--templates <t1|t2|...>]
                  [--backbone ...] [--backend ...]
  export-targets  --images <file...> --out <file> [--instruction <text>]
                  [--allow-empty-instruction] [--backbone ...] [--backend ...]
  inspect         <file>
`;

class UsageError extends Error {}

interface Parsed {
  command: string;
  positional: string[];
  flags: Map<string, string[]>;
}

function parseArgv(argv: string[]): Parsed {
  if (argv.length === 0) throw new UsageError("missing command");
  const [command, ...rest] = argv;
  const positional: string[] = [];
  const flags = new Map<string, string[]>();
  let current: string[] | null = null;
  for (const token of rest) {
    if (token.startsWith("--")) {
      current = [];
      flags.set(token.slice(2), current);
    } else if (current) {
      current.push(token);
    } else {
      positional.push(token);
    }
  }
  return { command, positional, flags };
}

function one(parsed: Parsed, name: string, fallback?: string): string {
  const values = parsed.flags.get(name);
  if (!values || values.length === 0) {
    if (fallback !== undefined) return fallback;
    throw new UsageError(`missing required flag --${name}`);
  }
  if (values.length !== 1) {
    throw new UsageError(`flag --${name} takes exactly one value`);
  }
  return values[0];
}

function many(parsed: Parsed, name: string): string[] {
  const values = parsed.flags.get(name);
  if (!values || values.length === 0) {
    throw new UsageError(`missing required flag --${name}`);
  }
  return values;
}

async function makeEncoder(parsed: Parsed): Promise<Encoder> {
  const backbone = one(parsed, "backbone", "B32") as VisionBackbone;
  if (!["B32", "B16", "L14"].includes(backbone)) {
    throw new UsageError(`unknown backbone ${JSON.stringify(backbone)}`);
  }
  const backend = one(parsed, "backend", "stub");
  if (backend === "stub") return new StubEncoder(backbone);
  if (backend === "transformers") {
    const { TransformersEncoder } = await import("./transformers.js");
    return TransformersEncoder.create(backbone);
  }
  throw new UsageError(`unknown backend ${JSON.stringify(backend)}`);
}

function imageInputs(parsed: Parsed): ImageInput[] {
  const group = one(parsed, "group", "");
  return many(parsed, "images").map((path) => ({
    id: basename(path),
    source: path,
    group,
  }));
}

function writeStore(store: ReturnType<typeof storeFromBytes>, out: string) {
  const bytes = storeToBytes(store);
  writeFileSync(out, bytes);
  console.log(
    `wrote ${store.records.length} records (dim ${store.dim}, ` +
      `${SpaceTag[store.spaceTag]}) -> ${out} [${bytes.length} bytes]`,
  );
}

async function run(argv: string[]): Promise<void> {
  const parsed = parseArgv(argv);
  switch (parsed.command) {
    case "export-visual": {
      const encoder = await makeEncoder(parsed);
      const config = defaultConfig();
      writeStore(await exportVisual(imageInputs(parsed), encoder, config),
                 one(parsed, "out"));
      return;
    }
    case "export-textual": {
      const encoder = await makeEncoder(parsed);
      const config = defaultConfig();
      const classes = one(parsed, "classes").split(",");
      const templates = one(
        parsed, "templates", "a photo of a face with an expression of " +
          "{class name}.",
      ).split("|");
      writeStore(await exportTextual(classes, templates, encoder, config),
                 one(parsed, "out"));
      return;
    }
    case "export-targets": {
      const encoder = await makeEncoder(parsed);
      const config = defaultConfig({
        allowEmptyInstruction: parsed.flags.has("allow-empty-instruction"),
      });
      if (parsed.flags.has("instruction")) {
        config.instruction = one(parsed, "instruction");
      } else if (config.allowEmptyInstruction) {
        config.instruction = "";
      }
      writeStore(await exportLlmTargets(imageInputs(parsed), encoder, config),
                 one(parsed, "out"));
      return;
    }
    case "inspect": {
      if (parsed.positional.length !== 1) {
        throw new UsageError("inspect takes exactly one file");
      }
      const store = storeFromBytes(readFileSync(parsed.positional[0]));
      console.log(
        `EMB1 store: ${store.records.length} records, dim ${store.dim}, ` +
          `space ${SpaceTag[store.spaceTag]}`,
      );
      for (const [key, value] of Object.entries(store.metadata)) {
        console.log(`  metadata ${key} = ${value}`);
      }
      return;
    }
    default:
      throw new UsageError(`unknown command ${JSON.stringify(parsed.command)}`);
  }
}

run(process.argv.slice(2)).catch((err) => {
  if (err instanceof UsageError) {
    process.stderr.write(`error: ${err.message}\n\n${USAGE}`);
    process.exit(2);
  }
  if (err instanceof StoreFormatError || err instanceof ExportError ||
      err instanceof BridgeConfigError || err?.code === "ENOENT") {
    process.stderr.write(`error: ${err.message}\n`);
    process.exit(3);
  }
  if (err instanceof RangeError) {
    process.stderr.write(`error: ${err.message}\n`);
    process.exit(4);
  }
  process.stderr.write(`error: ${err?.stack ?? err}\n`);
  process.exit(1);
});
