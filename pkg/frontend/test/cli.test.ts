import {
  cpSync,
  mkdtempSync,
  readFileSync,
  statSync,
  writeFileSync,
} from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { run, type Io } from "../src/cli";
import { parseFigureSpec } from "../src/figspec";
import { render } from "../src/render";

const SPECS = join(__dirname, "fixtures", "specs", "acceptance-figures.json");
const BUNDLE = join(__dirname, "fixtures", "bundle");

function capture(): { io: Io; out: string[]; err: string[] } {
  const out: string[] = [];
  const err: string[] = [];
  return {
    io: { out: (l) => out.push(l), err: (l) => err.push(l) },
    out,
    err,
  };
}

/** Copy the committed spec file next to a private bundle copy. */
function sandboxSpecs(): { dir: string; specs: string } {
  const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
  cpSync(BUNDLE, join(dir, "bundle"), { recursive: true });
  const text = readFileSync(SPECS, "utf8").replaceAll("../bundle/", "bundle/");
  const specs = join(dir, "figures.json");
  writeFileSync(specs, text);
  return { dir, specs };
}

describe("batch renderer", () => {
  it("renders every acceptance figure and reports each output", () => {
    const { dir, specs } = sandboxSpecs();
    const c = capture();
    expect(run([specs], c.io)).toBe(0);
    expect(c.err).toEqual([]);
    expect(c.out).toHaveLength(4);
    for (const name of [
      "dichotomy.svg",
      "density-overlay.svg",
      "value-surface.svg",
      "truncation-gaps.svg",
    ]) {
      expect(statSync(join(dir, "out", name)).size).toBeGreaterThan(500);
    }
  });

  it("never mutates its inputs and re-renders byte-identically", () => {
    const { dir, specs } = sandboxSpecs();
    const before = readFileSync(join(dir, "bundle", "dichotomy_study__ladder.csv"));
    expect(run([specs], capture().io)).toBe(0);
    const first = readFileSync(join(dir, "out", "dichotomy.svg"));
    expect(run([specs], capture().io)).toBe(0);
    const second = readFileSync(join(dir, "out", "dichotomy.svg"));
    expect(second.equals(first)).toBe(true);
    const after = readFileSync(join(dir, "bundle", "dichotomy_study__ladder.csv"));
    expect(after.equals(before)).toBe(true);
  });

  it("exits 2 with usage when called bare", () => {
    const c = capture();
    expect(run([], c.io)).toBe(2);
    expect(c.err[0]).toMatch(/usage/);
  });

  it("exits 2 on an unreadable spec file", () => {
    const c = capture();
    expect(run(["/nonexistent/specs.json"], c.io)).toBe(2);
    expect(c.err[0]).toMatch(/cannot read spec file/);
  });

  it("exits 2 on an invalid spec", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    const p = join(dir, "bad.json");
    writeFileSync(
      p,
      JSON.stringify({ kind: "scatter", input: "a.csv", output: "a.svg" }),
    );
    const c = capture();
    expect(run([p], c.io)).toBe(2);
    expect(c.err[0]).toMatch(/invalid figure spec/);
  });

  it("exits 1 and names the column when an input lacks one", () => {
    const { dir } = sandboxSpecs();
    const p = join(dir, "missing-col.json");
    writeFileSync(
      p,
      JSON.stringify({
        kind: "line",
        input: "bundle/dichotomy_study__ladder.csv",
        columns: ["t", "near_sup"],
        output: "out/x.svg",
      }),
    );
    const c = capture();
    expect(run([p], c.io)).toBe(1);
    expect(c.err[0]).toContain('missing column "near_sup"');
  });

  it("exits 1 when a referenced CSV does not exist", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    const p = join(dir, "no-input.json");
    writeFileSync(
      p,
      JSON.stringify({ kind: "line", input: "gone.csv", output: "out/x.svg" }),
    );
    const c = capture();
    expect(run([p], c.io)).toBe(1);
    expect(c.err[0]).toMatch(/cannot read CSV file/);
  });

  it("exits 1 on an empty CSV, naming the missing data", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    writeFileSync(join(dir, "empty.csv"), "");
    const p = join(dir, "empty.json");
    writeFileSync(
      p,
      JSON.stringify({ kind: "line", input: "empty.csv", output: "out/x.svg" }),
    );
    const c = capture();
    expect(run([p], c.io)).toBe(1);
    expect(c.err[0]).toMatch(/empty CSV, no header row/);
  });
});

describe("render entry point", () => {
  it("creates the output directory as needed", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-render-"));
    const out = join(dir, "deep", "nested", "fig.svg");
    const spec = parseFigureSpec({
      kind: "table",
      input: join(BUNDLE, "mehler_truncation__gaps.csv"),
      output: out,
    });
    expect(render(spec)).toBe(out);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });
});
