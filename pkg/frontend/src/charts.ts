/** SVG step charts drawn from the server's bid grid verbatim.
 *
 * Zero-order hold rendering: the value at grid bid k extends horizontally
 * until grid bid k+1. No smoothing, so the binned model's plateaus stay
 * visible. Null values (bids without cost support) break the path into
 * separate segments rather than interpolating across the gap.
 */

import type { CurvePoint } from "./types.js";

export const CHART_WIDTH = 320;
export const CHART_HEIGHT = 120;
const PAD = 6;

export type CurveField = "clicks" | "spend" | "cpa" | "winrate" | "cost";

interface XY {
  x: number;
  y: number | null;
}

function scale(
  value: number,
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

/** Step path ("M x y H x V y ...") segments for a possibly-gapped series. */
export function stepPathSegments(points: XY[]): string[] {
  const segments: string[] = [];
  let d = "";
  let lastY: number | null = null;
  for (const p of points) {
    if (p.y === null) {
      if (d) segments.push(d);
      d = "";
      lastY = null;
      continue;
    }
    if (!d) {
      d = `M ${p.x} ${p.y}`;
    } else {
      d += ` H ${p.x}`;
      if (p.y !== lastY) d += ` V ${p.y}`;
    }
    lastY = p.y;
  }
  if (d) segments.push(d);
  return segments;
}

/** One labelled SVG chart of `field` against the bid grid. */
export function renderChart(
  points: CurvePoint[],
  field: CurveField,
  title: string,
): HTMLElement {
  const figure = document.createElement("figure");
  figure.className = "chart";
  figure.dataset.field = field;

  const caption = document.createElement("figcaption");
  caption.textContent = title;
  figure.appendChild(caption);

  const values = points
    .map((p) => p[field])
    .filter((v): v is number => v !== null);
  if (points.length === 0 || values.length === 0) {
    const empty = document.createElement("p");
    empty.className = "chart-empty";
    empty.textContent = "no data";
    figure.appendChild(empty);
    return figure;
  }

  const xLo = points[0].bid;
  const xHi = points[points.length - 1].bid;
  const yLo = Math.min(0, ...values);
  const yHi = Math.max(...values);

  const xs: XY[] = points.map((p) => ({
    x: scale(p.bid, xLo, xHi, PAD, CHART_WIDTH - PAD),
    y:
      p[field] === null
        ? null
        : scale(p[field] as number, yLo, yHi, CHART_HEIGHT - PAD, PAD),
  }));

  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute("viewBox", `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`);
  svg.setAttribute("role", "img");
  for (const d of stepPathSegments(xs)) {
    const path = document.createElementNS(svgNs, "path");
    path.setAttribute("d", d);
    path.setAttribute("class", "chart-step");
    path.setAttribute("fill", "none");
    svg.appendChild(path);
  }
  figure.appendChild(svg as unknown as Node);
  return figure;
}

/** True when the grid carries nothing renderable: no points at all, or
 * every point has zero win rate and no cost support. */
export function isEmptyLandscape(points: CurvePoint[]): boolean {
  return points.every((p) => p.winrate === 0 && p.cost === null);
}

const CHARTS: Array<[CurveField, string]> = [
  ["clicks", "clicks vs. bid"],
  ["spend", "spend vs. bid"],
  ["cpa", "CPA vs. bid"],
  ["winrate", "win rate vs. bid"],
  ["cost", "eCPM cost vs. bid"],
];

/** All five planning charts, or the empty-landscape state. */
export function renderCharts(container: HTMLElement, points: CurvePoint[]): void {
  container.replaceChildren();
  if (isEmptyLandscape(points)) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "empty landscape: no wins observed in this bid range";
    container.appendChild(empty);
    return;
  }
  for (const [field, title] of CHARTS) {
    container.appendChild(renderChart(points, field, title));
  }
}
