export { parseFigureSpec, loadSpecFile, SpecError } from "./figspec.js";
export type { FigureSpec } from "./figspec.js";
export { readTable, numericColumn, columnIndex, CsvError } from "./csv.js";
export type { Table } from "./csv.js";
export { render } from "./render.js";
export { run } from "./cli.js";
