/**
 * Figure renderers.
 *
 * Each renderer maps parsed tables to a complete SVG document string.
 * Conventions shared by the bundle tables:
 *
 *   line     one table; first column is the x coordinate, every further
 *            column becomes a series
 *   overlay  one or more tables with the same convention, drawn on shared
 *            axes (used to compare two routes to the same curve)
 *   surface  one table with exactly three columns (row coord, column
 *            coord, value) forming a full rectangular grid
 *   table    one table typeset as monospace text
 */

import type { FigureSpec } from "./figspec.js";
import {
  columnIndex,
  CsvError,
  numericColumn,
  otherColumns,
  type Table,
} from "./csv.js";
import {
  axes,
  fmtTick,
  Frame,
  line,
  linearScale,
  logScale,
  polyline,
  rampColor,
  rect,
  Scale,
  SERIES_COLORS,
  svgDocument,
  text,
} from "./svg.js";

const WIDTH = 640;
const HEIGHT = 420;

interface Series {
  label: string;
  xs: number[];
  ys: number[];
}

function frameFor(spec: FigureSpec, rightPad: number): Frame {
  return {
    left: 70,
    top: spec.title ? 36 : 20,
    right: WIDTH - rightPad,
    bottom: HEIGHT - 52,
  };
}

function titleOf(spec: FigureSpec): string[] {
  return spec.title
    ? [text(WIDTH / 2, 20, spec.title, { anchor: "middle", size: 14 })]
    : [];
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

function seriesOf(
  table: Table,
  labelPrefix: string,
  bound?: string[],
): Series[] {
  const xName = bound ? bound[0]! : table.columns[0]!;
  const xs = numericColumn(table, xName);
  const rest = bound ? bound.slice(1) : otherColumns(table, [xName]);
  if (rest.length === 0) {
    throw new CsvError(
      `${table.file}: need at least one value column besides "${xName}"`,
    );
  }
  return rest.map((c) => ({
    label: labelPrefix + c,
    xs,
    ys: numericColumn(table, c),
  }));
}

function drawSeries(
  all: Series[],
  spec: FigureSpec,
  xName: string,
): string {
  const frame = frameFor(spec, 24);
  const [xLo, xHi] = extent(all.flatMap((s) => s.xs));
  const [yLo, yHi] = extent(all.flatMap((s) => s.ys));
  const pad = (yHi - yLo) * 0.06;
  const xScale: Scale =
    spec.x_scale === "log"
      ? logScale(xLo, xHi, frame.left, frame.right)
      : linearScale(xLo, xHi, frame.left, frame.right);
  const yScale = linearScale(yLo - pad, yHi + pad, frame.bottom, frame.top);

  const body: string[] = [...titleOf(spec)];
  body.push(
    ...axes(
      frame,
      xScale,
      yScale,
      spec.x_label ?? xName,
      spec.y_label ?? "",
    ),
  );
  all.forEach((s, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length]!;
    const dash = i % 2 === 1 ? "5 3" : undefined;
    const pts = s.xs.map(
      (x, k) => [xScale(x), yScale(s.ys[k]!)] as const,
    );
    body.push(polyline(pts, color, dash));
    // legend entry, top right, one row per series
    const ly = frame.top + 14 + i * 16;
    body.push(line(frame.right - 150, ly - 4, frame.right - 126, ly - 4, color, 2));
    body.push(text(frame.right - 120, ly, s.label));
  });
  return svgDocument(WIDTH, HEIGHT, body);
}

export function renderLine(spec: FigureSpec, tables: Table[]): string {
  if (tables.length !== 1) {
    throw new CsvError(`line figure takes exactly one input CSV, got ${tables.length}`);
  }
  const table = tables[0]!;
  return drawSeries(
    seriesOf(table, "", spec.columns),
    spec,
    spec.columns?.[0] ?? table.columns[0]!,
  );
}

export function renderOverlay(spec: FigureSpec, tables: Table[]): string {
  const prefixed = tables.length > 1;
  const all = tables.flatMap((t) =>
    seriesOf(t, prefixed ? `${t.file.replace(/\.csv$/, "")} ` : "", spec.columns),
  );
  return drawSeries(all, spec, spec.columns?.[0] ?? tables[0]!.columns[0]!);
}

export function renderSurface(spec: FigureSpec, tables: Table[]): string {
  if (tables.length !== 1) {
    throw new CsvError(`surface figure takes exactly one input CSV, got ${tables.length}`);
  }
  const table = tables[0]!;
  const names = spec.columns ?? table.columns;
  if (names.length !== 3) {
    throw new CsvError(
      `${table.file}: surface needs exactly 3 columns (row, column, value), got ${names.join(", ")}`,
    );
  }
  const [rName, cName, vName] = names as unknown as [string, string, string];
  const rs = numericColumn(table, rName);
  const cs = numericColumn(table, cName);
  const vs = numericColumn(table, vName);

  const rVals = [...new Set(rs)].sort((a, b) => a - b);
  const cVals = [...new Set(cs)].sort((a, b) => a - b);
  if (rVals.length * cVals.length !== vs.length) {
    throw new CsvError(
      `${table.file}: surface grid is ragged, ${vs.length} rows != ${rVals.length} x ${cVals.length}`,
    );
  }
  const rIdx = new Map(rVals.map((v, i) => [v, i]));
  const cIdx = new Map(cVals.map((v, i) => [v, i]));
  const grid = new Array<number>(vs.length).fill(NaN);
  for (let k = 0; k < vs.length; k++) {
    grid[rIdx.get(rs[k]!)! * cVals.length + cIdx.get(cs[k]!)!] = vs[k]!;
  }

  const frame = frameFor(spec, 86);
  const [vLo, vHi] = extent(vs);
  const cellW = (frame.right - frame.left) / cVals.length;
  const cellH = (frame.bottom - frame.top) / rVals.length;

  const body: string[] = [...titleOf(spec)];
  for (let i = 0; i < rVals.length; i++) {
    for (let j = 0; j < cVals.length; j++) {
      const u = (grid[i * cVals.length + j]! - vLo) / (vHi - vLo || 1);
      body.push(
        rect(
          frame.left + j * cellW,
          // row 0 at the bottom, so the vertical axis increases upward
          frame.bottom - (i + 1) * cellH,
          cellW + 0.5,
          cellH + 0.5,
          rampColor(u),
        ),
      );
    }
  }
  const xScale = linearScale(cVals[0]!, cVals[cVals.length - 1]!, frame.left, frame.right);
  const yScale = linearScale(rVals[0]!, rVals[rVals.length - 1]!, frame.bottom, frame.top);
  body.push(
    ...axes(
      frame,
      xScale,
      yScale,
      spec.x_label ?? cName,
      spec.y_label ?? rName,
    ),
  );
  // color bar on the right edge
  const barX = WIDTH - 62;
  const steps = 40;
  const barH = frame.bottom - frame.top;
  for (let k = 0; k < steps; k++) {
    body.push(
      rect(
        barX,
        frame.bottom - ((k + 1) * barH) / steps,
        10,
        barH / steps + 0.5,
        rampColor(k / (steps - 1)),
      ),
    );
  }
  body.push(text(barX + 14, frame.bottom + 4, fmtTick(vLo)));
  body.push(text(barX + 14, frame.top + 8, fmtTick(vHi)));
  body.push(text(barX + 5, frame.top - 6, vName, { anchor: "middle" }));
  return svgDocument(WIDTH, HEIGHT, body);
}

export function renderTable(spec: FigureSpec, tables: Table[]): string {
  if (tables.length !== 1) {
    throw new CsvError(`table figure takes exactly one input CSV, got ${tables.length}`);
  }
  const table = tables[0]!;
  const shown = spec.columns ?? table.columns;
  const indices = shown.map((c) => columnIndex(table, c));
  const display = table.rows.map((row) =>
    indices.map((idx) => {
      const cell = row[idx]!;
      const v = Number(cell);
      return cell.trim() !== "" && Number.isFinite(v)
        ? String(Number(v.toPrecision(8)))
        : cell;
    }),
  );
  const widths = shown.map((c, j) =>
    Math.max(c.length, ...display.map((r) => r[j]!.length)),
  );
  const charW = 7.5;
  const rowH = 18;
  const left = 24;
  const top = spec.title ? 46 : 30;
  const body: string[] = [...titleOf(spec)];
  let x = left;
  const colX: number[] = [];
  for (const w of widths) {
    colX.push(x);
    x += (w + 3) * charW;
  }
  shown.forEach((c, j) => {
    body.push(text(colX[j]!, top, c, { size: 12 }));
  });
  const ruleY = top + 6;
  body.push(line(left, ruleY, x - 3 * charW, ruleY));
  display.forEach((row, i) => {
    row.forEach((cell, j) => {
      body.push(text(colX[j]!, ruleY + (i + 1) * rowH, cell, { size: 12 }));
    });
  });
  const height = ruleY + (display.length + 1) * rowH + 16;
  return svgDocument(Math.max(WIDTH, Math.ceil(x)), height, body);
}
