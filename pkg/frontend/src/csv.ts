import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { EmptyInput, SchemaMismatch } from "./errors.js";

export type Cell = string | number | boolean | null;
export type Row = Record<string, Cell>;

export interface Table {
  readonly path: string;
  readonly columns: readonly string[];
  readonly rows: readonly Row[];
}

/** Parse a headered CSV. Numeric cells come back as numbers. */
export function readTable(path: string): Table {
  const text = readFileSync(path, "utf8");
  if (text.trim() === "") {
    throw new EmptyInput(path);
  }
  const parsed = Papa.parse<Row>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  // Single-column files legitimately have no delimiter to detect.
  const errors = parsed.errors.filter((e) => e.code !== "UndetectableDelimiter");
  if (errors.length > 0) {
    const first = errors[0]!;
    const where = first.row === undefined ? "" : ` (data row ${first.row + 1})`;
    throw new SchemaMismatch(path, `${first.message}${where}`);
  }
  const columns = parsed.meta.fields ?? [];
  if (columns.length === 0 || parsed.data.length === 0) {
    throw new EmptyInput(path);
  }
  return { path, columns, rows: parsed.data };
}

export function requireColumns(
  table: Table,
  needed: readonly string[],
  kind: string,
): void {
  const missing = needed.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaMismatch(
      table.path,
      `missing columns for ${kind}: ${missing.join(", ")}`,
      missing,
    );
  }
}

/** Numeric cell, or SchemaMismatch naming the offending column and row. */
export function num(table: Table, index: number, column: string): number {
  const v = table.rows[index]![column];
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new SchemaMismatch(
      table.path,
      `column "${column}" is not numeric at data row ${index + 1} (got ${JSON.stringify(v)})`,
    );
  }
  return v;
}

/** Label cell; numbers are fine as labels, absent values are not. */
export function label(table: Table, index: number, column: string): string {
  const v = table.rows[index]![column];
  if (v === null || v === undefined || v === "") {
    throw new SchemaMismatch(
      table.path,
      `column "${column}" is empty at data row ${index + 1}`,
    );
  }
  return String(v);
}
