/**
 * Gate for this package: every figure kind renders from the experiment
 * runner's CSV artifacts, and the loglog-norms slope annotations reproduce
 * the fitted slopes recorded in the CSV to three decimals. The fixtures are
 * verbatim `uclab all --seed 42` outputs, which are byte-deterministic.
 */
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { num, readTable } from "../src/csv.js";
import { render, type FigureKind } from "../src/figures.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

const JOBS: [FigureKind, string][] = [
  ["margins", "three-sphere.csv"],
  ["ratio-sweep", "carleman-log.csv"],
  ["ratio-sweep", "carleman-power.csv"],
  ["ratio-sweep", "caccioppoli.csv"],
  ["loglog-norms", "vanishing-order.csv"],
  ["doubling", "doubling.csv"],
];

describe("figure kinds against runner artifacts", () => {
  it.each(JOBS)("%s renders %s without error", (kind, name) => {
    const svg = render({ kind, inputs: [join(FIXTURES, name)], output: "unused.svg" });
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.endsWith("</svg>\n")).toBe(true);
    expect(svg).toContain('width="960" height="600"');
  });

  it("is deterministic for every kind", () => {
    for (const [kind, name] of JOBS) {
      const j = { kind, inputs: [join(FIXTURES, name)], output: "unused.svg" };
      expect(render(j)).toBe(render(j));
    }
  });
});

describe("loglog-norms slope annotations", () => {
  it("annotates every record with its fitted slope to 3 decimals", () => {
    const path = join(FIXTURES, "vanishing-order.csv");
    const svg = render({ kind: "loglog-norms", inputs: [path], output: "unused.svg" });
    const t = readTable(path);
    const annotated = [...svg.matchAll(/class="slope">([^<]+)<\/text>/g)].map((m) => m[1]);
    const expected = t.rows.map((_, i) => num(t, i, "lhs_log").toFixed(3));
    expect(annotated).toEqual(expected);
  });

  it("labels the quadratic harmonic record 6.000", () => {
    // u = r^2 cos 2theta has squared ball norm ~ r^6 in the plane.
    const path = join(FIXTURES, "vanishing-order.csv");
    const svg = render({ kind: "loglog-norms", inputs: [path], output: "unused.svg" });
    const t = readTable(path);
    const i = t.rows.findIndex((r) => r.field === "harmonic(l=2,i=0)");
    expect(i).toBeGreaterThanOrEqual(0);
    expect(num(t, i, "lhs_log").toFixed(3)).toBe("6.000");
    expect(svg).toContain('class="slope">6.000</text>');
  });
});
