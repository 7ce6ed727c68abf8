import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { readTable } from "../src/csv.js";
import { EmptyInput, SchemaMismatch } from "../src/errors.js";
import { render, renderToFile, type FigureKind, type PlotJob } from "../src/figures.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function fixture(name: string): string {
  return join(FIXTURES, name);
}

function job(kind: FigureKind, inputs: string[], title?: string): PlotJob {
  return { kind, inputs, output: "/dev/null.svg", title };
}

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "plots-fig-"));
}

function polylineXs(svg: string): number[][] {
  const out: number[][] = [];
  for (const m of svg.matchAll(/<polyline points="([^"]+)"/g)) {
    out.push(m[1]!.split(" ").map((p) => Number(p.split(",")[0])));
  }
  return out;
}

describe("render", () => {
  it("draws margins with a zero baseline and one marker per record", () => {
    const svg = render(job("margins", [fixture("three-sphere.csv")]));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain('width="960" height="600"');
    expect(svg).toContain("stroke-dasharray");
    expect(svg.match(/<circle /g)).toHaveLength(17);
    expect(svg).toContain("three-sphere: margin by field");
  });

  it("flags negative margins in the falsification color", () => {
    const dir = tempDir();
    const path = join(dir, "bad.csv");
    writeFileSync(
      path,
      "check,field,r1,r2,r3,lhs_log,rhs_log,margin\n" +
        "three-sphere,probe,0.001,0.01,1,5.0,4.0,-1.0\n",
      "utf8",
    );
    const svg = render(job("margins", [path]));
    expect(svg).toContain("#d62728");
  });

  it("keeps every ratio-sweep curve monotone in x", () => {
    const svg = render(job("ratio-sweep", [fixture("carleman-log.csv")]));
    const curves = polylineXs(svg);
    expect(curves).toHaveLength(12);
    for (const xs of curves) {
      expect(xs).toHaveLength(7);
      for (let i = 1; i < xs.length; i += 1) {
        expect(xs[i]!).toBeGreaterThan(xs[i - 1]!);
      }
    }
  });

  it("merges several sweep inputs into one legend", () => {
    const svg = render(
      job("ratio-sweep", [fixture("carleman-log.csv"), fixture("caccioppoli.csv")]),
    );
    expect(svg).toContain("const*xi(0.1,0.2)");
    expect(svg).toContain("log, caccioppoli: ratio sweep");
  });

  it("renders the power sweep with a log-scaled ratio axis", () => {
    const svg = render(job("ratio-sweep", [fixture("carleman-power.csv")]));
    expect(svg).toContain("ratio (log scale)");
    expect(polylineXs(svg).length).toBeGreaterThan(1);
  });

  it("draws one doubling polyline per field", () => {
    const svg = render(job("doubling", [fixture("doubling.csv")]));
    const t = readTable(fixture("doubling.csv"));
    const fields = new Set(t.rows.map((r) => r.field));
    expect(polylineXs(svg)).toHaveLength(fields.size);
    expect(svg).toContain("doubling: margin vs radius");
  });

  it("honors a title override", () => {
    const svg = render(job("margins", [fixture("three-sphere.csv")], "override"));
    expect(svg).toContain(">override</text>");
    expect(svg).not.toContain("margin by field");
  });

  it("rejects a sweep CSV offered to a verification figure", () => {
    try {
      render(job("margins", [fixture("carleman-log.csv")]));
      expect.unreachable("should have thrown");
    } catch (e) {
      expect(e).toBeInstanceOf(SchemaMismatch);
      expect((e as SchemaMismatch).missing).toEqual([
        "check",
        "field",
        "r1",
        "r2",
        "r3",
        "margin",
      ]);
    }
  });

  it("rejects a verification CSV offered to the sweep figure", () => {
    try {
      render(job("ratio-sweep", [fixture("vanishing-order.csv")]));
      expect.unreachable("should have thrown");
    } catch (e) {
      expect(e).toBeInstanceOf(SchemaMismatch);
      expect((e as SchemaMismatch).missing).toEqual(["estimate", "member", "param", "ratio"]);
    }
  });

  it("refuses nonpositive ratios on the log axis", () => {
    const dir = tempDir();
    const path = join(dir, "neg.csv");
    writeFileSync(
      path,
      "estimate,member,param,lhs_log,rhs_log,ratio\nlog,probe,4,1,2,-0.5\n",
      "utf8",
    );
    expect(() => render(job("ratio-sweep", [path]))).toThrow(/log-scaled/);
  });
});

describe("renderToFile", () => {
  it("writes byte-identical files for identical input", () => {
    const dir = tempDir();
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    renderToFile({ kind: "doubling", inputs: [fixture("doubling.csv")], output: a });
    renderToFile({ kind: "doubling", inputs: [fixture("doubling.csv")], output: b });
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
  });

  it("writes nothing when the input is empty", () => {
    const dir = tempDir();
    const empty = join(dir, "empty.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(empty, "check,field,r1,r2,r3,lhs_log,rhs_log,margin\n", "utf8");
    expect(() =>
      renderToFile({ kind: "margins", inputs: [empty], output: out }),
    ).toThrow(EmptyInput);
    expect(existsSync(out)).toBe(false);
  });

  it("writes nothing when the schema does not match", () => {
    const dir = tempDir();
    const out = join(dir, "fig.svg");
    expect(() =>
      renderToFile({ kind: "doubling", inputs: [fixture("carleman-log.csv")], output: out }),
    ).toThrow(SchemaMismatch);
    expect(existsSync(out)).toBe(false);
  });
});
