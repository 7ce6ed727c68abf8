#!/usr/bin/env node
/**
 * plots <kind> --in CSV [--in CSV ...] --out FIG.svg [--title STR]
 *
 * Exit codes: 0 figure written, 1 usage or I/O problem, 2 input data
 * rejected (empty CSV or schema mismatch). A failed run writes nothing.
 */
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { EmptyInput, SchemaMismatch } from "./errors.js";
import { FIGURE_KINDS, renderToFile, type FigureKind } from "./figures.js";

const USAGE = `usage: plots <${FIGURE_KINDS.join("|")}> --in CSV [--in CSV ...] --out FIG.svg [--title STR]`;

interface Cli {
  kind?: string;
  extra: string[];
  inputs: string[];
  out?: string;
  title?: string;
  help: boolean;
}

function parseCli(argv: readonly string[]): Cli {
  const { values, positionals } = parseArgs({
    args: [...argv],
    options: {
      in: { type: "string", multiple: true },
      out: { type: "string" },
      title: { type: "string" },
      help: { type: "boolean" },
    },
    allowPositionals: true,
  });
  return {
    kind: positionals[0],
    extra: positionals.slice(1),
    inputs: values.in ?? [],
    out: values.out,
    title: values.title,
    help: values.help ?? false,
  };
}

export function run(argv: readonly string[]): number {
  let cli: Cli;
  try {
    cli = parseCli(argv);
  } catch (e) {
    console.error(`plots: error: ${(e as Error).message}`);
    console.error(USAGE);
    return 1;
  }
  if (cli.help) {
    console.log(USAGE);
    return 0;
  }
  if (cli.kind === undefined || cli.extra.length > 0) {
    console.error("plots: error: expected exactly one figure kind");
    console.error(USAGE);
    return 1;
  }
  if (!FIGURE_KINDS.includes(cli.kind as FigureKind)) {
    console.error(`plots: error: unknown figure kind "${cli.kind}"`);
    console.error(USAGE);
    return 1;
  }
  if (cli.inputs.length === 0 || cli.out === undefined) {
    console.error("plots: error: --in and --out are required");
    console.error(USAGE);
    return 1;
  }
  if (!cli.out.endsWith(".svg")) {
    console.error(`plots: error: output must be an .svg path, got "${cli.out}"`);
    return 1;
  }
  try {
    renderToFile({
      kind: cli.kind as FigureKind,
      inputs: cli.inputs,
      output: cli.out,
      title: cli.title,
    });
  } catch (e) {
    if (e instanceof EmptyInput || e instanceof SchemaMismatch) {
      console.error(`plots: error: ${e.message}`);
      return 2;
    }
    console.error(`plots: error: ${(e as Error).message}`);
    return 1;
  }
  console.log(`${cli.kind}: wrote ${cli.out}`);
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(run(process.argv.slice(2)));
}
