/** Bid explorer: a snapping slider over the server's bid grid with a live
 * readout of the curve row at the selected grid point.
 *
 * The readout is a pure lookup into the fetched curve — moving the slider
 * never issues a request and never computes a metric client-side.
 */

import { setReadout } from "./format.js";
import type { CurvePoint, CurvesResponse } from "./types.js";

export const READOUT_FIELDS = [
  "bid",
  "winrate",
  "cost",
  "clicks",
  "conversions",
  "spend",
  "cpa",
] as const;

export class CurveExplorer {
  readonly slider: HTMLInputElement;
  private readonly cells = new Map<string, HTMLElement>();
  private index = 0;

  constructor(
    readonly container: HTMLElement,
    readonly curves: CurvesResponse,
  ) {
    container.replaceChildren();

    this.slider = document.createElement("input");
    this.slider.type = "range";
    this.slider.id = "bid-slider";
    this.slider.min = "0";
    this.slider.max = String(curves.points.length - 1);
    this.slider.step = "1";
    this.slider.value = "0";
    this.slider.addEventListener("input", () => {
      this.setIndex(Number(this.slider.value));
    });
    container.appendChild(this.slider);

    const dl = document.createElement("dl");
    dl.className = "readout";
    for (const field of READOUT_FIELDS) {
      const dt = document.createElement("dt");
      dt.textContent = field;
      const dd = document.createElement("dd");
      dd.dataset.field = field;
      this.cells.set(field, dd);
      dl.append(dt, dd);
    }
    container.appendChild(dl);
    this.setIndex(0);
  }

  get point(): CurvePoint {
    return this.curves.points[this.index];
  }

  /** Select grid point i (clamped to the grid). */
  setIndex(i: number): void {
    const last = this.curves.points.length - 1;
    this.index = Math.min(Math.max(Math.round(i), 0), last);
    this.slider.value = String(this.index);
    const p = this.point;
    for (const field of READOUT_FIELDS) {
      setReadout(this.cells.get(field)!, p[field]);
    }
  }

  /** Snap an arbitrary bid to the nearest grid point; out-of-range bids
   * clamp to the first or last point. */
  setBid(bid: number): void {
    let best = 0;
    let bestDist = Infinity;
    this.curves.points.forEach((p, i) => {
      const dist = Math.abs(p.bid - bid);
      if (dist < bestDist) {
        bestDist = dist;
        best = i;
      }
    });
    this.setIndex(best);
  }

  readoutCell(field: string): HTMLElement {
    return this.cells.get(field)!;
  }
}
