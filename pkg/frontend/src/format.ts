/** Display formatting. Presentation only: every formatted number is derived
 * from an API response value that the element also carries verbatim in its
 * data-raw attribute. */

const grouped = new Intl.NumberFormat("en-US", { maximumFractionDigits: 2 });

/** "14,333.33" for money-scale values, "0.008" for sub-unit rates. */
export function formatNumber(value: number): string {
  if (!Number.isFinite(value)) return String(value);
  if (value === 0) return "0";
  if (Math.abs(value) >= 1) return grouped.format(value);
  // keep three significant digits, without trailing zero noise
  return String(Number(value.toPrecision(3)));
}

/** Fill a readout element: data-raw holds the verbatim API value, the text
 * is its rounded rendering; null renders as an em dash with empty data-raw. */
export function setReadout(el: HTMLElement, value: number | string | null): void {
  if (value === null) {
    el.dataset.raw = "";
    el.textContent = "—";
  } else if (typeof value === "string") {
    el.dataset.raw = value;
    el.textContent = value;
  } else {
    el.dataset.raw = String(value);
    el.textContent = formatNumber(value);
  }
}
