import { writeFileSync } from "node:fs";
import { label, num, readTable, requireColumns, type Table } from "./csv.js";
import {
  WIDTH,
  axes,
  color,
  el,
  esc,
  legend,
  linearScale,
  logScale,
  px,
  svgDocument,
  type Frame,
  type Scale,
} from "./svg.js";

export type FigureKind = "margins" | "ratio-sweep" | "loglog-norms" | "doubling";

export const FIGURE_KINDS: readonly FigureKind[] = [
  "margins",
  "ratio-sweep",
  "loglog-norms",
  "doubling",
];

/** Verification-record schema shared by the three-sphere, vanishing-order
 *  and doubling checkers. lhs_log doubles as the fitted norm slope. */
export const VERIFICATION_COLUMNS = [
  "check",
  "field",
  "r1",
  "r2",
  "r3",
  "lhs_log",
  "rhs_log",
  "margin",
] as const;

/** Estimate-report schema written by the Carleman and Caccioppoli sweeps. */
export const SWEEP_COLUMNS = [
  "estimate",
  "member",
  "param",
  "lhs_log",
  "rhs_log",
  "ratio",
] as const;

export interface PlotJob {
  kind: FigureKind;
  inputs: readonly string[];
  output: string;
  title?: string;
}

export function requiredColumns(kind: FigureKind): readonly string[] {
  return kind === "ratio-sweep" ? SWEEP_COLUMNS : VERIFICATION_COLUMNS;
}

interface VRow {
  check: string;
  field: string;
  r1: number;
  r2: number;
  lhsLog: number;
  margin: number;
}

interface SRow {
  estimate: string;
  member: string;
  param: number;
  ratio: number;
}

function verificationRows(tables: readonly Table[]): VRow[] {
  const out: VRow[] = [];
  for (const t of tables) {
    for (let i = 0; i < t.rows.length; i += 1) {
      out.push({
        check: label(t, i, "check"),
        field: label(t, i, "field"),
        r1: num(t, i, "r1"),
        r2: num(t, i, "r2"),
        lhsLog: num(t, i, "lhs_log"),
        margin: num(t, i, "margin"),
      });
    }
  }
  return out;
}

function sweepRows(tables: readonly Table[]): SRow[] {
  const out: SRow[] = [];
  for (const t of tables) {
    for (let i = 0; i < t.rows.length; i += 1) {
      out.push({
        estimate: label(t, i, "estimate"),
        member: label(t, i, "member"),
        param: num(t, i, "param"),
        ratio: num(t, i, "ratio"),
      });
    }
  }
  return out;
}

function groupBy<T>(items: readonly T[], key: (item: T) => string): Map<string, T[]> {
  const groups = new Map<string, T[]>();
  for (const item of items) {
    const k = key(item);
    const g = groups.get(k);
    if (g) {
      g.push(item);
    } else {
      groups.set(k, [item]);
    }
  }
  return groups;
}

function extent(values: readonly number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

function polyline(points: readonly [number, number][], stroke: string): string {
  const pts = points.map(([gx, gy]) => `${px(gx)},${px(gy)}`).join(" ");
  return el("polyline", {
    points: pts,
    fill: "none",
    stroke,
    "stroke-width": "2",
  });
}

const NO_TICKS: readonly [] = [];

/** Margin per field, markers on stems, dashed zero line. Fields keep file
 *  order, so harmonic members appear in increasing l. */
function marginsFigure(rows: readonly VRow[], title: string | undefined): string {
  const frame: Frame = { left: 72, top: 48, width: WIDTH - 72 - 36, height: 402 };
  const n = rows.length;
  const xAt = (i: number): number => frame.left + ((i + 0.5) / n) * frame.width;
  const [mLo, mHi] = extent(rows.map((r) => r.margin));
  const y = linearScale(
    Math.min(0, mLo),
    Math.max(0, mHi),
    frame.top + frame.height,
    frame.top,
  );
  const xDummy: Scale = { map: xAt, ticks: NO_TICKS };
  const parts: string[] = [axes(frame, xDummy, y, "", "margin")];
  const zero = y.map(0);
  parts.push(
    el("line", {
      x1: frame.left,
      y1: zero,
      x2: frame.left + frame.width,
      y2: zero,
      stroke: "#888888",
      "stroke-dasharray": "4 3",
    }),
  );
  rows.forEach((r, i) => {
    const gx = xAt(i);
    const gy = y.map(r.margin);
    const fill = r.margin < 0 ? "#d62728" : color(0);
    parts.push(
      el("line", { x1: gx, y1: zero, x2: gx, y2: gy, stroke: fill }),
      el("circle", { cx: gx, cy: gy, r: 4.5, fill }),
      el(
        "text",
        {
          "text-anchor": "end",
          "font-size": "10",
          transform: `translate(${px(gx + 3)} ${px(frame.top + frame.height + 12)}) rotate(-55)`,
        },
        esc(r.field),
      ),
    );
  });
  const heading = title ?? `${rows[0]!.check}: margin by field`;
  return svgDocument(heading, parts.join("\n"));
}

/** One curve per corpus member, ratio against the sweep parameter.
 *  The y axis is log-scaled, so every ratio must be positive. */
function sweepFigure(
  rows: readonly SRow[],
  title: string | undefined,
  paths: readonly string[],
): string {
  for (const r of rows) {
    if (!(r.ratio > 0)) {
      throw new Error(
        `${paths.join(", ")}: ratio ${r.ratio} for member "${r.member}" cannot go on a log-scaled axis`,
      );
    }
  }
  const frame: Frame = { left: 72, top: 48, width: WIDTH - 72 - 230, height: 456 };
  const groups = groupBy(rows, (r) => r.member);
  for (const g of groups.values()) {
    g.sort((a, b) => a.param - b.param);
  }
  const [pLo, pHi] = extent(rows.map((r) => r.param));
  const [rLo, rHi] = extent(rows.map((r) => r.ratio));
  const x = linearScale(pLo, pHi, frame.left, frame.left + frame.width);
  const y = logScale(rLo, rHi, frame.top + frame.height, frame.top);
  const parts: string[] = [axes(frame, x, y, "parameter", "ratio (log scale)")];
  const entries: { label: string; color: string }[] = [];
  let gi = 0;
  for (const [member, g] of groups) {
    const stroke = color(gi);
    parts.push(polyline(g.map((r) => [x.map(r.param), y.map(r.ratio)]), stroke));
    entries.push({ label: member, color: stroke });
    gi += 1;
  }
  parts.push(legend(frame.left + frame.width + 16, frame.top + 10, entries));
  const estimates = [...new Set(rows.map((r) => r.estimate))];
  const heading = title ?? `${estimates.join(", ")}: ratio sweep`;
  return svgDocument(heading, parts.join("\n"));
}

/** Normalized ball-norm lines on log-log axes, one per record, anchored at
 *  I(r2) = 1 so the fan spreads by slope alone. Each line is annotated with
 *  its fitted slope to three decimals. */
function loglogFigure(rows: readonly VRow[], title: string | undefined): string {
  const frame: Frame = { left: 72, top: 48, width: WIDTH - 72 - 230, height: 456 };
  const segments = rows.map((r) => {
    const yLeft = (r.r1 / r.r2) ** r.lhsLog;
    return { row: r, yLeft };
  });
  const [xLo] = extent(rows.map((r) => r.r1));
  const [, xHi] = extent(rows.map((r) => r.r2));
  const [yLo, yHi] = extent(segments.flatMap((s) => [s.yLeft, 1]));
  const x = logScale(xLo, xHi, frame.left, frame.left + frame.width);
  const y = logScale(yLo, yHi, frame.top + frame.height, frame.top);
  const parts: string[] = [axes(frame, x, y, "r", "I(r) / I(r2)")];
  const entries: { label: string; color: string }[] = [];
  segments.forEach((s, i) => {
    const stroke = color(i);
    const x1 = x.map(s.row.r1);
    const y1 = y.map(s.yLeft);
    parts.push(
      el("line", {
        x1,
        y1,
        x2: x.map(s.row.r2),
        y2: y.map(1),
        stroke,
        "stroke-width": "2",
      }),
      el(
        "text",
        { x: x1 + 6, y: y1 - 5, "font-size": "11", fill: stroke, class: "slope" },
        s.row.lhsLog.toFixed(3),
      ),
    );
    entries.push({ label: s.row.field, color: stroke });
  });
  parts.push(legend(frame.left + frame.width + 16, frame.top + 10, entries));
  const heading = title ?? `${rows[0]!.check}: ball-norm slopes (log-log)`;
  return svgDocument(heading, parts.join("\n"));
}

/** Margin against the inner radius, one polyline per field. */
function doublingFigure(rows: readonly VRow[], title: string | undefined): string {
  const frame: Frame = { left: 72, top: 48, width: WIDTH - 72 - 230, height: 456 };
  const groups = groupBy(rows, (r) => r.field);
  for (const g of groups.values()) {
    g.sort((a, b) => a.r1 - b.r1);
  }
  const [rLo, rHi] = extent(rows.map((r) => r.r1));
  const [mLo, mHi] = extent(rows.map((r) => r.margin));
  const x = logScale(rLo, rHi, frame.left, frame.left + frame.width);
  const y = linearScale(mLo, mHi, frame.top + frame.height, frame.top);
  const parts: string[] = [axes(frame, x, y, "r (log scale)", "margin")];
  const entries: { label: string; color: string }[] = [];
  let gi = 0;
  for (const [field, g] of groups) {
    const stroke = color(gi);
    parts.push(polyline(g.map((r) => [x.map(r.r1), y.map(r.margin)]), stroke));
    for (const r of g) {
      parts.push(el("circle", { cx: x.map(r.r1), cy: y.map(r.margin), r: 3, fill: stroke }));
    }
    entries.push({ label: field, color: stroke });
    gi += 1;
  }
  parts.push(legend(frame.left + frame.width + 16, frame.top + 10, entries));
  const heading = title ?? `${rows[0]!.check}: margin vs radius`;
  return svgDocument(heading, parts.join("\n"));
}

/** Build the figure as SVG text. Schema and emptiness failures surface
 *  before anything is drawn, so a throwing render leaves no artifact. */
export function render(job: PlotJob): string {
  if (job.inputs.length === 0) {
    throw new Error("at least one input CSV is required");
  }
  const tables = job.inputs.map(readTable);
  const needed = requiredColumns(job.kind);
  for (const t of tables) {
    requireColumns(t, needed, job.kind);
  }
  switch (job.kind) {
    case "margins":
      return marginsFigure(verificationRows(tables), job.title);
    case "ratio-sweep":
      return sweepFigure(sweepRows(tables), job.title, job.inputs);
    case "loglog-norms":
      return loglogFigure(verificationRows(tables), job.title);
    case "doubling":
      return doublingFigure(verificationRows(tables), job.title);
  }
}

export function renderToFile(job: PlotJob): void {
  const text = render(job);
  writeFileSync(job.output, text, "utf8");
}
