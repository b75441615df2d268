/** Recommendation panel: the recommended bid, its predicted outcomes, and
 * — when the goal binds — the two actionable what-ifs from the response:
 * "raise budget to B'" (adjusted_budget) and "relax CPA goal to C'"
 * (adjusted_cpa). Each chip applies the server's adjustment value verbatim
 * to the form and re-queries; the panel itself computes nothing.
 */

import { formatNumber, setReadout } from "./format.js";
import type { Recommendation } from "./types.js";

export const PANEL_FIELDS = [
  "bid",
  "winrate",
  "clicks",
  "conversions",
  "spend",
  "cpa",
] as const;

export interface PanelActions {
  onRaiseBudget(value: number): void;
  onRelaxCpa(value: number): void;
}

const STATUS_LABEL: Record<Recommendation["status"], string> = {
  feasible: "feasible: goal met within budget",
  budget_limited: "budget limited: best affordable bid shown",
  infeasible: "infeasible: CPA goal unreachable, cheapest bid shown",
};

export function renderRecommendation(
  container: HTMLElement,
  rec: Recommendation,
  actions: PanelActions,
): void {
  container.replaceChildren();
  const panel = document.createElement("div");
  panel.className = `panel panel-${rec.status}`;
  panel.dataset.status = rec.status;

  const status = document.createElement("p");
  status.className = "panel-status";
  status.dataset.field = "status";
  status.dataset.raw = rec.status;
  status.textContent = STATUS_LABEL[rec.status];
  panel.appendChild(status);

  const dl = document.createElement("dl");
  dl.className = "readout";
  for (const field of PANEL_FIELDS) {
    const dt = document.createElement("dt");
    dt.textContent = field;
    const dd = document.createElement("dd");
    dd.dataset.field = field;
    setReadout(dd, rec[field]);
    dl.append(dt, dd);
  }
  panel.appendChild(dl);

  const chips = document.createElement("div");
  chips.className = "chips";
  if (rec.adjusted_budget !== null) {
    chips.appendChild(
      chip("chip-budget", rec.adjusted_budget, "raise budget to", () =>
        actions.onRaiseBudget(rec.adjusted_budget!),
      ),
    );
  }
  if (rec.adjusted_cpa !== null) {
    chips.appendChild(
      chip("chip-cpa", rec.adjusted_cpa, "relax CPA goal to", () =>
        actions.onRelaxCpa(rec.adjusted_cpa!),
      ),
    );
  }
  if (chips.childElementCount > 0) panel.appendChild(chips);
  container.appendChild(panel);
}

function chip(
  id: string,
  value: number,
  label: string,
  onClick: () => void,
): HTMLButtonElement {
  const button = document.createElement("button");
  button.type = "button";
  button.id = id;
  button.className = "chip";
  button.dataset.raw = String(value);
  button.textContent = `${label} ${formatNumber(value)}`;
  button.addEventListener("click", onClick);
  return button;
}
