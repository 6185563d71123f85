import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { isAbsolute, join } from "node:path";
import { describe, expect, it } from "vitest";

import { loadSpecFile, parseFigureSpec, SpecError } from "../src/figspec";

const SPECS = join(__dirname, "fixtures", "specs");

describe("parseFigureSpec", () => {
  it("accepts a minimal spec and applies defaults", () => {
    const s = parseFigureSpec({
      kind: "line",
      input: "a.csv",
      output: "a.svg",
    });
    expect(s.input).toEqual(["a.csv"]);
    expect(s.x_scale).toBe("linear");
    expect(s.columns).toBeUndefined();
  });

  it("keeps input lists as given", () => {
    const s = parseFigureSpec({
      kind: "overlay",
      input: ["a.csv", "b.csv"],
      output: "o.svg",
    });
    expect(s.input).toEqual(["a.csv", "b.csv"]);
  });

  it("rejects an unknown kind", () => {
    expect(() =>
      parseFigureSpec({ kind: "scatter", input: "a.csv", output: "a.svg" }),
    ).toThrow(/kind/);
  });

  it("rejects unknown keys", () => {
    expect(() =>
      parseFigureSpec({
        kind: "line",
        input: "a.csv",
        output: "a.svg",
        dpi: 300,
      }),
    ).toThrow(SpecError);
  });

  it("rejects non-svg output paths", () => {
    expect(() =>
      parseFigureSpec({ kind: "line", input: "a.csv", output: "a.png" }),
    ).toThrow(/output path must end in .svg/);
  });

  it("rejects an empty input list", () => {
    expect(() =>
      parseFigureSpec({ kind: "overlay", input: [], output: "o.svg" }),
    ).toThrow(SpecError);
  });
});

describe("loadSpecFile", () => {
  it("loads the committed acceptance specs and resolves paths", () => {
    const specs = loadSpecFile(join(SPECS, "acceptance-figures.json"));
    expect(specs.map((s) => s.kind)).toEqual([
      "line",
      "overlay",
      "surface",
      "table",
    ]);
    for (const s of specs) {
      expect(isAbsolute(s.input[0]!)).toBe(true);
      expect(isAbsolute(s.output)).toBe(true);
    }
    expect(specs[0]!.x_scale).toBe("log");
  });

  it("rejects files that are not JSON", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-spec-"));
    const p = join(dir, "broken.json");
    writeFileSync(p, "{not json");
    expect(() => loadSpecFile(p)).toThrow(/not valid JSON/);
  });

  it("rejects a missing file", () => {
    expect(() => loadSpecFile("/nonexistent/specs.json")).toThrow(
      /cannot read spec file/,
    );
  });

  it("rejects an empty spec list", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-spec-"));
    const p = join(dir, "empty.json");
    writeFileSync(p, "[]");
    expect(() => loadSpecFile(p)).toThrow(/empty spec list/);
  });
});
