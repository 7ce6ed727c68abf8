/**
 * Hand-rolled SVG output. No canvas, no DOM: every renderer below is a pure
 * string builder, so identical input data yields byte-identical files. The
 * canvas size is fixed and nothing here reads the clock or an RNG.
 */

export const WIDTH = 960;
export const HEIGHT = 600;

export const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
] as const;

export function color(i: number): string {
  return PALETTE[i % PALETTE.length]!;
}

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Pixel coordinate; two decimals keeps files small and output stable. */
export function px(v: number): string {
  return v.toFixed(2);
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children = "",
): string {
  const a = Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${typeof v === "number" ? px(v) : v}"`)
    .join("");
  return children === "" ? `<${tag}${a}/>` : `<${tag}${a}>${children}</${tag}>`;
}

export interface Tick {
  at: number;
  text: string;
}

export interface Scale {
  map(v: number): number;
  readonly ticks: readonly Tick[];
}

function shortNumber(v: number): string {
  return String(Number(v.toPrecision(10)));
}

function thin(ticks: Tick[], limit = 12): Tick[] {
  if (ticks.length <= limit) return ticks;
  const stride = Math.ceil(ticks.length / limit);
  return ticks.filter((_, i) => i % stride === 0);
}

export function linearScale(
  lo: number,
  hi: number,
  r0: number,
  r1: number,
): Scale {
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const span = hi - lo;
  const raw = span / 6;
  const mag = 10 ** Math.floor(Math.log10(raw));
  let step = 10 * mag;
  for (const m of [1, 2, 5]) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const ticks: Tick[] = [];
  for (let i = Math.ceil(lo / step); i * step <= hi; i += 1) {
    ticks.push({ at: i * step, text: shortNumber(i * step) });
  }
  return {
    map: (v) => r0 + ((v - lo) / span) * (r1 - r0),
    ticks: thin(ticks),
  };
}

export function logScale(
  lo: number,
  hi: number,
  r0: number,
  r1: number,
): Scale {
  if (!(lo > 0) || !(hi > 0)) {
    throw new Error(`log scale needs positive bounds, got [${lo}, ${hi}]`);
  }
  let a = Math.log10(lo);
  let b = Math.log10(hi);
  if (a === b) {
    a -= 0.5;
    b += 0.5;
  }
  const pad = 0.05 * (b - a);
  a -= pad;
  b += pad;
  const ticks: Tick[] = [];
  for (let d = Math.ceil(a); d <= Math.floor(b); d += 1) {
    ticks.push({ at: 10 ** d, text: shortNumber(10 ** d) });
  }
  return {
    map: (v) => r0 + ((Math.log10(v) - a) / (b - a)) * (r1 - r0),
    ticks: thin(ticks),
  };
}

export interface Frame {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function axes(
  frame: Frame,
  x: Scale,
  y: Scale,
  xLabel: string,
  yLabel: string,
): string {
  const right = frame.left + frame.width;
  const bottom = frame.top + frame.height;
  const parts: string[] = [];
  for (const t of x.ticks) {
    const gx = x.map(t.at);
    parts.push(
      el("line", { x1: gx, y1: frame.top, x2: gx, y2: bottom, stroke: "#dddddd" }),
      el("line", { x1: gx, y1: bottom, x2: gx, y2: bottom + 5, stroke: "#333333" }),
      el(
        "text",
        { x: gx, y: bottom + 18, "text-anchor": "middle", fill: "#333333" },
        esc(t.text),
      ),
    );
  }
  for (const t of y.ticks) {
    const gy = y.map(t.at);
    parts.push(
      el("line", { x1: frame.left, y1: gy, x2: right, y2: gy, stroke: "#dddddd" }),
      el("line", { x1: frame.left - 5, y1: gy, x2: frame.left, y2: gy, stroke: "#333333" }),
      el(
        "text",
        { x: frame.left - 8, y: gy + 4, "text-anchor": "end", fill: "#333333" },
        esc(t.text),
      ),
    );
  }
  parts.push(
    el("rect", {
      x: frame.left,
      y: frame.top,
      width: frame.width,
      height: frame.height,
      fill: "none",
      stroke: "#333333",
    }),
    el(
      "text",
      { x: frame.left + frame.width / 2, y: bottom + 40, "text-anchor": "middle" },
      esc(xLabel),
    ),
    el(
      "text",
      {
        x: 0,
        y: 0,
        "text-anchor": "middle",
        transform: `translate(${px(frame.left - 52)} ${px(frame.top + frame.height / 2)}) rotate(-90)`,
      },
      esc(yLabel),
    ),
  );
  return parts.join("\n");
}

export function legend(
  xLeft: number,
  yTop: number,
  entries: readonly { label: string; color: string }[],
): string {
  const parts: string[] = [];
  entries.forEach((e, i) => {
    const y = yTop + 18 * i;
    parts.push(
      el("line", { x1: xLeft, y1: y, x2: xLeft + 22, y2: y, stroke: e.color, "stroke-width": 2 }),
      el("text", { x: xLeft + 28, y: y + 4, fill: "#111111" }, esc(e.label)),
    );
  });
  return parts.join("\n");
}

export function svgDocument(title: string, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif" font-size="12">`,
    el("rect", { x: 0, y: 0, width: WIDTH, height: HEIGHT, fill: "#ffffff" }),
    el(
      "text",
      { x: WIDTH / 2, y: 26, "text-anchor": "middle", "font-size": "16" },
      esc(title),
    ),
    body,
    "</svg>",
    "",
  ].join("\n");
}
