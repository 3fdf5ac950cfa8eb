/** plot --in <csv> --kind <success_curve|scaling|error_hist> --out <svg>
 *        [--group-by <column>] [--title <text>]
 *
 * Exit codes: 0 ok, 2 bad usage or schema mismatch. */
import { readFileSync, writeFileSync } from "node:fs";
import { SchemaError } from "./csv.js";
import { PlotKind, render } from "./plots.js";

export function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const key = argv[i];
    if (!key.startsWith("--")) {
      throw new SchemaError(`unexpected argument ${JSON.stringify(key)}`);
    }
    const value = argv[i + 1];
    if (value === undefined) {
      throw new SchemaError(`flag ${key} needs a value`);
    }
    args.set(key.slice(2), value);
    i++;
  }
  return args;
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const input = args.get("in");
    const kind = args.get("kind") as PlotKind | undefined;
    const out = args.get("out");
    if (!input || !kind || !out) {
      throw new SchemaError("usage: plot --in <csv> --kind <kind> --out <svg> [--group-by col] [--title text]");
    }
    const svg = render({
      input: readFileSync(input, "utf8"),
      kind,
      groupBy: args.get("group-by"),
      title: args.get("title"),
    });
    writeFileSync(out, svg + "\n");
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`plot error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
