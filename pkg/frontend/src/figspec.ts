/**
 * Figure specifications.
 *
 * A figure spec is a small JSON object naming the input table(s), the plot
 * kind, the axis labels, and the output image path.  Specs are validated
 * strictly: unknown keys are rejected so a typo cannot silently drop an
 * option.
 */

import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { z } from "zod";

const figureSpecSchema = z
  .object({
    kind: z.enum(["line", "overlay", "surface", "table"]),
    // one CSV path or several; overlay accepts many, the rest take one
    input: z.union([
      z.string().min(1).transform((s) => [s]),
      z.array(z.string().min(1)).nonempty(),
    ]),
    output: z.string().min(1).refine((p) => p.endsWith(".svg"), {
      message: "output path must end in .svg",
    }),
    title: z.string().optional(),
    x_label: z.string().optional(),
    y_label: z.string().optional(),
    x_scale: z.enum(["linear", "log"]).default("linear"),
    // column binding in role order; every name must exist in each input:
    //   line/overlay  [x, series...]
    //   surface       [row, column, value]
    //   table         columns to show
    // omitted: header order decides the roles
    columns: z.array(z.string().min(1)).nonempty().optional(),
  })
  .strict();

export type FigureSpec = z.infer<typeof figureSpecSchema>;

export class SpecError extends Error {}

/** Validate one already-decoded spec object. */
export function parseFigureSpec(raw: unknown): FigureSpec {
  const res = figureSpecSchema.safeParse(raw);
  if (!res.success) {
    const first = res.error.issues[0]!;
    const where = first.path.length > 0 ? `${first.path.join(".")}: ` : "";
    throw new SpecError(`invalid figure spec: ${where}${first.message}`);
  }
  return res.data;
}

/**
 * Load specs from a JSON file holding one spec or an array of specs.
 * Relative input/output paths are resolved against the file's directory,
 * so a spec file can sit next to its bundle.
 */
export function loadSpecFile(path: string): FigureSpec[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new SpecError(`cannot read spec file ${path}`);
  }
  let decoded: unknown;
  try {
    decoded = JSON.parse(text);
  } catch (e) {
    throw new SpecError(`${path}: not valid JSON (${(e as Error).message})`);
  }
  const items = Array.isArray(decoded) ? decoded : [decoded];
  if (items.length === 0) {
    throw new SpecError(`${path}: empty spec list`);
  }
  const base = dirname(path);
  return items.map((item) => {
    const spec = parseFigureSpec(item);
    return {
      ...spec,
      input: spec.input.map((p) => resolve(base, p)) as [string, ...string[]],
      output: resolve(base, spec.output),
    };
  });
}
