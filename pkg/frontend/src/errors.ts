/** CSV with a header but no data rows, or no content at all. */
export class EmptyInput extends Error {
  constructor(path: string) {
    super(`${path}: no data rows`);
    this.name = "EmptyInput";
  }
}

/** CSV header does not carry every column the figure kind reads. */
export class SchemaMismatch extends Error {
  readonly missing: string[];

  constructor(path: string, detail: string, missing: string[] = []) {
    super(`${path}: ${detail}`);
    this.name = "SchemaMismatch";
    this.missing = missing;
  }
}
