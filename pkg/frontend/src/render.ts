/**
 * Spec-to-file rendering.
 *
 * `render` is the one entry point: it loads the input tables read-only,
 * dispatches on the figure kind, and writes the SVG to the spec's output
 * path.  Identical inputs produce identical output bytes.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import type { FigureSpec } from "./figspec.js";
import { readTable, type Table } from "./csv.js";
import {
  renderLine,
  renderOverlay,
  renderSurface,
  renderTable,
} from "./figures.js";

const RENDERERS: Record<
  FigureSpec["kind"],
  (spec: FigureSpec, tables: Table[]) => string
> = {
  line: renderLine,
  overlay: renderOverlay,
  surface: renderSurface,
  table: renderTable,
};

/** Render one figure; returns the path written. */
export function render(spec: FigureSpec): string {
  const tables = spec.input.map(readTable);
  const svg = RENDERERS[spec.kind](spec, tables);
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg, "utf8");
  return spec.output;
}
