/**
 * Hand-rolled SVG output.
 *
 * Everything here is pure string assembly: same inputs, same bytes.  No
 * timestamps, no randomness, no host-dependent formatting.  Coordinates are
 * written with a fixed significant-digit budget so float noise below the
 * pixel level cannot leak into the file.
 */

/* ------------------------------------------------------------------ */
/* numbers and text                                                    */
/* ------------------------------------------------------------------ */

/** Compact decimal with 6 significant digits; "-0" is normalized to "0". */
export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate: ${x}`);
  if (x === 0) return "0";
  let s = x.toPrecision(6);
  if (s.includes("e")) {
    return String(Number(s));
  }
  if (s.includes(".")) {
    s = s.replace(/0+$/, "").replace(/\.$/, "");
  }
  return s === "-0" ? "0" : s;
}

/** Short label for tick marks and legends. */
export function fmtTick(x: number): string {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (a >= 1e4 || a < 1e-3) return x.toExponential(1).replace("e+", "e");
  return String(Number(x.toPrecision(4)));
}

export function esc(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/* ------------------------------------------------------------------ */
/* scales and ticks                                                    */
/* ------------------------------------------------------------------ */

export interface Scale {
  (v: number): number;
  ticks(): number[];
}

export function linearScale(
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
): Scale {
  const span = hi - lo === 0 ? 1 : hi - lo;
  const f = (v: number) => outLo + ((v - lo) / span) * (outHi - outLo);
  f.ticks = () => linearTicks(lo, hi);
  return f;
}

export function logScale(
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
): Scale {
  if (lo <= 0 || hi <= 0) {
    throw new Error(
      `log scale needs positive data, got range [${lo}, ${hi}]`,
    );
  }
  const a = Math.log10(lo);
  const b = Math.log10(hi);
  const span = b - a === 0 ? 1 : b - a;
  const f = (v: number) =>
    outLo + ((Math.log10(v) - a) / span) * (outHi - outLo);
  f.ticks = () => {
    const out: number[] = [];
    for (let k = Math.ceil(a - 1e-9); k <= Math.floor(b + 1e-9); k++) {
      out.push(10 ** k);
    }
    // degenerate decade-free ranges still get end markers
    return out.length >= 2 ? out : [lo, hi];
  };
  return f;
}

/** Round ticks at a 1/2/5 step, covering [lo, hi] with about 5 marks. */
export function linearTicks(lo: number, hi: number): number[] {
  if (lo === hi) return [lo];
  const rawStep = (hi - lo) / 5;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const out: number[] = [];
  for (
    let v = Math.ceil(lo / step) * step;
    v <= hi + step * 1e-9;
    v += step
  ) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

/* ------------------------------------------------------------------ */
/* colors                                                              */
/* ------------------------------------------------------------------ */

export const SERIES_COLORS = [
  "#1f6fb2",
  "#c44e52",
  "#2e8b57",
  "#8172b3",
  "#b8860b",
  "#4c72b0",
] as const;

// viridis control points, dark to bright
const RAMP: ReadonlyArray<readonly [number, number, number]> = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [180, 222, 44],
  [253, 231, 37],
];

/** Map u in [0, 1] to a ramp color; out-of-range u is clamped. */
export function rampColor(u: number): string {
  const t = Math.min(1, Math.max(0, u)) * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(t));
  const w = t - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * w);
  const lo = RAMP[i]!;
  const hi = RAMP[i + 1]!;
  const hex = (v: number) => v.toString(16).padStart(2, "0");
  return `#${hex(mix(lo[0], hi[0]))}${hex(mix(lo[1], hi[1]))}${hex(mix(lo[2], hi[2]))}`;
}

/* ------------------------------------------------------------------ */
/* document assembly                                                   */
/* ------------------------------------------------------------------ */

export const FONT = "font-family=\"Menlo, Consolas, monospace\"";

export function svgDocument(
  width: number,
  height: number,
  body: string[],
): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

export function polyline(
  pts: Array<readonly [number, number]>,
  stroke: string,
  dash?: string,
): string {
  const d = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline points="${d}" fill="none" stroke="${stroke}" stroke-width="1.5"${dashAttr}/>`;
}

export function text(
  x: number,
  y: number,
  s: string,
  opts: { anchor?: string; size?: number; rotate?: boolean } = {},
): string {
  const anchor = opts.anchor ?? "start";
  const size = opts.size ?? 11;
  const rot = opts.rotate
    ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"`
    : "";
  return `<text x="${fmt(x)}" y="${fmt(y)}" ${FONT} font-size="${size}" fill="#222222" text-anchor="${anchor}"${rot}>${esc(s)}</text>`;
}

export function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  stroke = "#555555",
  width = 1,
): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function rect(
  x: number,
  y: number,
  w: number,
  h: number,
  fill: string,
): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`;
}

export interface Frame {
  left: number;
  top: number;
  right: number;
  bottom: number;
}

/** Axis box with tick marks and labels on the left and bottom edges. */
export function axes(
  frame: Frame,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
): string[] {
  const parts: string[] = [];
  parts.push(line(frame.left, frame.bottom, frame.right, frame.bottom));
  parts.push(line(frame.left, frame.top, frame.left, frame.bottom));
  for (const t of xScale.ticks()) {
    const px = xScale(t);
    if (px < frame.left - 0.5 || px > frame.right + 0.5) continue;
    parts.push(line(px, frame.bottom, px, frame.bottom + 4));
    parts.push(text(px, frame.bottom + 16, fmtTick(t), { anchor: "middle" }));
  }
  for (const t of yScale.ticks()) {
    const py = yScale(t);
    if (py < frame.top - 0.5 || py > frame.bottom + 0.5) continue;
    parts.push(line(frame.left - 4, py, frame.left, py));
    parts.push(text(frame.left - 7, py + 4, fmtTick(t), { anchor: "end" }));
  }
  const midX = (frame.left + frame.right) / 2;
  const midY = (frame.top + frame.bottom) / 2;
  if (xLabel) {
    parts.push(text(midX, frame.bottom + 34, xLabel, { anchor: "middle", size: 12 }));
  }
  if (yLabel) {
    parts.push(
      text(frame.left - 44, midY, yLabel, {
        anchor: "middle",
        size: 12,
        rotate: true,
      }),
    );
  }
  return parts;
}
