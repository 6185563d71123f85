/**
 * CSV ingestion for experiment bundles.
 *
 * Bundle tables are RFC-4180 with a header row and full-precision decimal
 * floats.  Parsing keeps cells as strings; numeric extraction happens per
 * column so a bad cell can be reported with its row number.
 */

import { readFileSync } from "node:fs";
import { basename } from "node:path";
import Papa from "papaparse";

export interface Table {
  /** Basename of the source file, used in error messages. */
  file: string;
  columns: string[];
  /** Row-major cells, one string per column. */
  rows: string[][];
}

export class CsvError extends Error {}

/** Read one bundle table.  Empty files and ragged rows are refused. */
export function readTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new CsvError(`cannot read CSV file ${path}`);
  }
  const file = basename(path);
  const parsed = Papa.parse<string[]>(text, {
    delimiter: ",",
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0]!;
    throw new CsvError(`${file}: malformed CSV (${e.message})`);
  }
  const grid = parsed.data;
  if (grid.length === 0) {
    throw new CsvError(`${file}: empty CSV, no header row`);
  }
  const columns = grid[0]!;
  const rows = grid.slice(1);
  if (rows.length === 0) {
    throw new CsvError(`${file}: no data rows below the header`);
  }
  for (let i = 0; i < rows.length; i++) {
    if (rows[i]!.length !== columns.length) {
      throw new CsvError(
        `${file}: row ${i + 1} has ${rows[i]!.length} cells, header has ${columns.length}`,
      );
    }
  }
  return { file, columns, rows };
}

/** Index of a required column; the error names the column it wanted. */
export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(
      `missing column "${name}" in ${table.file} (columns present: ${table.columns.join(", ")})`,
    );
  }
  return idx;
}

/** One column as finite numbers. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  const out = new Array<number>(table.rows.length);
  for (let i = 0; i < table.rows.length; i++) {
    const cell = table.rows[i]![idx]!;
    const v = Number(cell);
    if (cell.trim() === "" || !Number.isFinite(v)) {
      throw new CsvError(
        `${table.file}: column "${name}" row ${i + 1} is not a finite number: "${cell}"`,
      );
    }
    out[i] = v;
  }
  return out;
}

/** Column names other than the listed ones, in header order. */
export function otherColumns(table: Table, except: string[]): string[] {
  return table.columns.filter((c) => !except.includes(c));
}
