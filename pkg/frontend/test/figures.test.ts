import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { readTable } from "../src/csv";
import { parseFigureSpec, type FigureSpec } from "../src/figspec";
import {
  renderLine,
  renderOverlay,
  renderSurface,
  renderTable,
} from "../src/figures";

const BUNDLE = join(__dirname, "fixtures", "bundle");
const LADDER = join(BUNDLE, "dichotomy_study__ladder.csv");
const DENSITY = join(BUNDLE, "mehler_fourier__density.csv");
const SURFACE = join(BUNDLE, "hjb_hopf_cole__surface.csv");
const GAPS = join(BUNDLE, "mehler_truncation__gaps.csv");

function spec(partial: Record<string, unknown>): FigureSpec {
  return parseFigureSpec({ output: "o.svg", ...partial });
}

describe("dichotomy line figure", () => {
  const fig = spec({
    kind: "line",
    input: LADDER,
    columns: ["t", "compact_sup", "far_sup"],
    x_label: "t",
    y_label: "sup deviation",
    x_scale: "log",
  });

  it("renders both ladder curves with a log-x axis", () => {
    const svg = renderLine(fig, [readTable(LADDER)]);
    expect(svg).toContain("<svg");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
    expect(svg).toContain(">compact_sup<");
    expect(svg).toContain(">far_sup<");
    // decade ticks from the log scale over t in [1e-3, 0.5]
    expect(svg).toContain(">0.001<");
    expect(svg).toContain(">0.1<");
  });

  it("is deterministic", () => {
    const a = renderLine(fig, [readTable(LADDER)]);
    const b = renderLine(fig, [readTable(LADDER)]);
    expect(a).toBe(b);
  });

  it("names a column that is not in the input", () => {
    const bad = spec({
      kind: "line",
      input: LADDER,
      columns: ["t", "compact_sup", "far_sup", "phantom"],
    });
    expect(() => renderLine(bad, [readTable(LADDER)])).toThrow(
      /missing column "phantom" in dichotomy_study__ladder\.csv/,
    );
  });

  it("rejects log scale over data that is not positive", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-fig-"));
    const p = join(dir, "neg.csv");
    writeFileSync(p, "t,y\r\n-1,2\r\n1,3\r\n");
    const f = spec({ kind: "line", input: p, x_scale: "log" });
    expect(() => renderLine(f, [readTable(p)])).toThrow(
      /log scale needs positive data/,
    );
  });

  it("takes exactly one input", () => {
    const f = spec({ kind: "line", input: [LADDER, LADDER] });
    expect(() => renderLine(f, [readTable(LADDER), readTable(LADDER)])).toThrow(
      /exactly one input/,
    );
  });
});

describe("density overlay figure", () => {
  it("draws both routes on shared axes", () => {
    const fig = spec({
      kind: "overlay",
      input: DENSITY,
      columns: ["x", "density_fft", "density_mc"],
    });
    const svg = renderOverlay(fig, [readTable(DENSITY)]);
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
    expect(svg).toContain(">density_fft<");
    expect(svg).toContain(">density_mc<");
  });

  it("prefixes labels with the file stem when inputs are separate files", () => {
    const fig = spec({ kind: "overlay", input: [LADDER, LADDER] });
    const svg = renderOverlay(fig, [readTable(LADDER), readTable(LADDER)]);
    expect(svg).toContain(">dichotomy_study__ladder compact_sup<");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(4);
  });

  it("names a missing column", () => {
    const fig = spec({
      kind: "overlay",
      input: DENSITY,
      columns: ["x", "density_exact"],
    });
    expect(() => renderOverlay(fig, [readTable(DENSITY)])).toThrow(
      /missing column "density_exact"/,
    );
  });
});

describe("value surface figure", () => {
  it("renders one heat cell per grid point plus a color bar", () => {
    const fig = spec({
      kind: "surface",
      input: SURFACE,
      columns: ["t", "x", "value"],
    });
    const svg = renderSurface(fig, [readTable(SURFACE)]);
    const cells = (svg.match(/<rect/g) ?? []).length;
    // 11 x 201 grid cells + 40 color bar steps + page background
    expect(cells).toBe(11 * 201 + 40 + 1);
    expect(svg).toContain(">value<");
  });

  it("names a missing bound column", () => {
    const fig = spec({
      kind: "surface",
      input: SURFACE,
      columns: ["t", "x", "cost"],
    });
    expect(() => renderSurface(fig, [readTable(SURFACE)])).toThrow(
      /missing column "cost" in hjb_hopf_cole__surface\.csv/,
    );
  });

  it("refuses column counts other than three", () => {
    const fig = spec({ kind: "surface", input: LADDER, columns: ["t", "far_sup"] });
    expect(() => renderSurface(fig, [readTable(LADDER)])).toThrow(
      /exactly 3 columns/,
    );
  });

  it("refuses ragged grids", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-fig-"));
    const p = join(dir, "ragged.csv");
    writeFileSync(p, "t,x,v\r\n0,0,1\r\n0,1,2\r\n1,0,3\r\n");
    const fig = spec({ kind: "surface", input: p });
    expect(() => renderSurface(fig, [readTable(p)])).toThrow(
      /surface grid is ragged, 3 rows != 2 x 2/,
    );
  });
});

describe("table figure", () => {
  it("typesets header and rows", () => {
    const fig = spec({ kind: "table", input: GAPS });
    const svg = renderTable(fig, [readTable(GAPS)]);
    expect(svg).toContain(">eps<");
    expect(svg).toContain(">sup_gap<");
    expect(svg).toContain(">0.5<");
  });

  it("selects and orders columns through the binding", () => {
    const fig = spec({ kind: "table", input: LADDER, columns: ["far_sup", "t"] });
    const svg = renderTable(fig, [readTable(LADDER)]);
    expect(svg).toContain(">far_sup<");
    expect(svg).not.toContain(">compact_sup<");
  });

  it("names a missing column", () => {
    const fig = spec({ kind: "table", input: GAPS, columns: ["eps", "rate"] });
    expect(() => renderTable(fig, [readTable(GAPS)])).toThrow(
      /missing column "rate"/,
    );
  });

  it("escapes markup in cells", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-fig-"));
    const p = join(dir, "markup.csv");
    writeFileSync(p, 'label,v\r\n"<b>&x</b>",1\r\n');
    const fig = spec({ kind: "table", input: p });
    const svg = renderTable(fig, [readTable(p)]);
    expect(svg).toContain("&lt;b&gt;&amp;x&lt;/b&gt;");
    expect(svg).not.toContain("<b>");
  });
});
