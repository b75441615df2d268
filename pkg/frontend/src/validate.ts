/** Client-side form validation.
 *
 * Mirrors the server's /v1/recommend validation rule for rule, including
 * field names, messages, and emission order, so the form rejects exactly
 * the payloads the server would 400. The contract test replays recorded
 * server verdicts against this function.
 */

import type { FieldError, GridParams, PlannerForm } from "./types.js";

export function validateForm(form: PlannerForm): FieldError[] {
  const errors: FieldError[] = [];
  if (!form.group) {
    errors.push({ field: "group", message: "group must be non-empty" });
  }
  if (!(form.impressions > 0)) {
    errors.push({ field: "impressions", message: "impressions must be positive" });
  }
  if (!(form.pctr > 0)) {
    errors.push({ field: "pctr", message: "pctr must be positive" });
  } else if (form.pctr > 1) {
    errors.push({ field: "pctr", message: "pctr must be at most 1" });
  }
  if (!(form.pcvr > 0)) {
    errors.push({ field: "pcvr", message: "pcvr must be positive" });
  } else if (form.pcvr > 1) {
    errors.push({ field: "pcvr", message: "pcvr must be at most 1" });
  }
  if (!(form.cpa_goal > 0)) {
    errors.push({ field: "cpa_goal", message: "cpa_goal must be positive" });
  }
  if (!(form.budget > 0)) {
    errors.push({ field: "budget", message: "budget must be positive" });
  }
  if (form.tolerance < 0) {
    errors.push({ field: "tolerance", message: "tolerance must be non-negative" });
  }
  return errors;
}

/** Grid-control checks matching the curves endpoint's step/to rules. */
export function validateGrid(grid: GridParams): FieldError[] {
  const errors: FieldError[] = [];
  if (!(grid.step > 0)) {
    errors.push({ field: "step", message: "step must be positive" });
  }
  if (grid.to < grid.from) {
    errors.push({ field: "to", message: "to must be >= from" });
  }
  return errors;
}
