/**
 * Batch figure renderer.
 *
 *   markovlab-plots <specs.json> [more.json ...]
 *
 * Each argument is a JSON file holding one figure spec or an array of
 * them.  All figures from all files are rendered in order.  Any failure
 * (unreadable file, invalid spec, missing column, ragged grid) stops the
 * run with the error on stderr and a nonzero exit code.
 */

import { loadSpecFile, SpecError } from "./figspec.js";
import { render } from "./render.js";

export interface Io {
  out(line: string): void;
  err(line: string): void;
}

export function run(argv: string[], io: Io): number {
  if (argv.length === 0) {
    io.err("usage: markovlab-plots <figure-specs.json> [more.json ...]");
    return 2;
  }
  try {
    const specs = argv.flatMap(loadSpecFile);
    for (const spec of specs) {
      const path = render(spec);
      io.out(`${spec.kind}: wrote ${path}`);
    }
    return 0;
  } catch (e) {
    if (e instanceof SpecError) {
      io.err(`spec error: ${e.message}`);
      return 2;
    }
    io.err(`render error: ${(e as Error).message}`);
    return 1;
  }
}
