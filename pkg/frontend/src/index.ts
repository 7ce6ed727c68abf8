export { EmptyInput, SchemaMismatch } from "./errors.js";
export { readTable, requireColumns, type Row, type Table } from "./csv.js";
export {
  FIGURE_KINDS,
  SWEEP_COLUMNS,
  VERIFICATION_COLUMNS,
  render,
  renderToFile,
  requiredColumns,
  type FigureKind,
  type PlotJob,
} from "./figures.js";
export { run } from "./cli.js";
