/** Planner page assembly and behaviour.
 *
 * The app owns one form, one recommendation panel, one bid explorer, and
 * one charts section, all driven exclusively by /v1 responses. A submission
 * validates client-side first (mirroring the server's 400 rules), then
 * fetches curves and a recommendation together under latest-wins gating:
 * at most one submission is in flight and a newer one silently supersedes
 * an older one.
 */

import { ApiClient, ApiError, LatestWins, NetworkError } from "./api.js";
import { renderCharts } from "./charts.js";
import { CurveExplorer } from "./curveview.js";
import { renderRecommendation } from "./panel.js";
import type { FieldError, GridParams, PlannerForm } from "./types.js";
import { validateForm, validateGrid } from "./validate.js";

interface FieldSpec {
  name: string;
  label: string;
  value: string;
}

const FORM_FIELDS: FieldSpec[] = [
  { name: "group", label: "group", value: "" },
  { name: "impressions", label: "impressions", value: "1000000" },
  { name: "pctr", label: "pCTR", value: "0.01" },
  { name: "pcvr", label: "pCVR", value: "0.1" },
  { name: "cpa_goal", label: "CPA goal", value: "20" },
  { name: "budget", label: "budget", value: "50000" },
  { name: "tolerance", label: "CPA tolerance", value: "0.05" },
];

const GRID_FIELDS: FieldSpec[] = [
  { name: "from", label: "bids from", value: "0.01" },
  { name: "to", label: "to", value: "0.05" },
  { name: "step", label: "step", value: "0.01" },
];

export class PlannerApp {
  readonly form: HTMLFormElement;
  readonly banner: HTMLElement;
  readonly panelSection: HTMLElement;
  readonly explorerSection: HTMLElement;
  readonly chartsSection: HTMLElement;
  explorer: CurveExplorer | null = null;

  private readonly inputs = new Map<string, HTMLInputElement>();
  private readonly errorSlots = new Map<string, HTMLElement>();
  private readonly inflight = new LatestWins();
  private lastRun: Promise<void> = Promise.resolve();

  constructor(
    readonly root: HTMLElement,
    readonly api: ApiClient,
  ) {
    root.replaceChildren();
    this.form = document.createElement("form");
    this.form.id = "planner-form";
    this.form.noValidate = true;
    for (const spec of [...FORM_FIELDS, ...GRID_FIELDS]) {
      this.form.appendChild(this.buildField(spec));
    }
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.id = "plan";
    submit.textContent = "Plan";
    this.form.appendChild(submit);
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.submit();
    });
    root.appendChild(this.form);

    this.banner = section(root, "banner");
    this.panelSection = section(root, "recommendation");
    this.explorerSection = section(root, "explorer");
    this.chartsSection = section(root, "charts");
  }

  private buildField(spec: FieldSpec): HTMLElement {
    const wrap = document.createElement("p");
    wrap.className = "field";
    const label = document.createElement("label");
    label.textContent = spec.label;
    const input = document.createElement("input");
    input.name = spec.name;
    input.id = `f-${spec.name}`;
    input.value = spec.value;
    label.appendChild(input);
    wrap.appendChild(label);
    const error = document.createElement("span");
    error.className = "field-error";
    error.dataset.field = spec.name;
    error.hidden = true;
    wrap.appendChild(error);
    this.inputs.set(spec.name, input);
    this.errorSlots.set(spec.name, error);
    return wrap;
  }

  input(name: string): HTMLInputElement {
    return this.inputs.get(name)!;
  }

  readForm(): PlannerForm {
    return {
      group: this.input("group").value,
      impressions: Number(this.input("impressions").value),
      pctr: Number(this.input("pctr").value),
      pcvr: Number(this.input("pcvr").value),
      cpa_goal: Number(this.input("cpa_goal").value),
      budget: Number(this.input("budget").value),
      tolerance: Number(this.input("tolerance").value),
    };
  }

  readGrid(): GridParams {
    return {
      from: Number(this.input("from").value),
      to: Number(this.input("to").value),
      step: Number(this.input("step").value),
    };
  }

  /** Run one submission; the returned promise settles when rendering (or
   * error display) for THIS submission is complete. */
  submit(): Promise<void> {
    const run = this.doSubmit();
    this.lastRun = run;
    return run;
  }

  /** Resolves when the most recently started submission has settled. */
  settled(): Promise<void> {
    return this.lastRun;
  }

  private async doSubmit(): Promise<void> {
    this.clearBanner();
    this.showFieldErrors([]);
    const form = this.readForm();
    const grid = this.readGrid();
    const errors = [...validateForm(form), ...validateGrid(grid)];
    if (errors.length > 0) {
      this.showFieldErrors(errors);
      return;
    }
    try {
      const result = await this.inflight.run((signal) =>
        Promise.all([
          this.api.curves(form, grid, signal),
          this.api.recommend(form, signal),
        ]),
      );
      if (result === null) return; // superseded by a newer submission
      const [curves, rec] = result;
      renderCharts(this.chartsSection, curves.points);
      this.explorer = new CurveExplorer(this.explorerSection, curves);
      this.explorer.setBid(rec.bid);
      renderRecommendation(this.panelSection, rec, {
        onRaiseBudget: (value) => this.applyAdjustment("budget", value),
        onRelaxCpa: (value) => this.applyAdjustment("cpa_goal", value),
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 400 && err.fieldErrors.length > 0) {
        this.showFieldErrors(err.fieldErrors);
      } else if (err instanceof ApiError && err.status === 404) {
        this.showBanner("no model for this group", false);
      } else if (err instanceof NetworkError) {
        this.showBanner("could not reach the planner service", true);
      } else {
        this.showBanner(err instanceof Error ? err.message : String(err), false);
      }
    }
  }

  private applyAdjustment(field: string, value: number): void {
    // String(value) round-trips the double exactly, so the follow-up
    // request carries the server's adjustment verbatim
    this.input(field).value = String(value);
    this.submit();
  }

  private showFieldErrors(errors: FieldError[]): void {
    for (const slot of this.errorSlots.values()) {
      slot.hidden = true;
      slot.textContent = "";
    }
    const unmatched: FieldError[] = [];
    for (const error of errors) {
      const slot = this.errorSlots.get(error.field);
      if (slot) {
        slot.textContent = error.message;
        slot.hidden = false;
      } else {
        unmatched.push(error);
      }
    }
    if (unmatched.length > 0) {
      this.showBanner(
        unmatched.map((e) => `${e.field}: ${e.message}`).join("; "),
        false,
      );
    }
  }

  private showBanner(message: string, retryable: boolean): void {
    this.banner.replaceChildren();
    const note = document.createElement("p");
    note.className = "banner-message";
    note.textContent = message;
    this.banner.appendChild(note);
    if (retryable) {
      const retry = document.createElement("button");
      retry.type = "button";
      retry.id = "retry";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => this.submit());
      this.banner.appendChild(retry);
    }
    this.banner.hidden = false;
  }

  private clearBanner(): void {
    this.banner.replaceChildren();
    this.banner.hidden = true;
  }
}

function section(root: HTMLElement, id: string): HTMLElement {
  const el = document.createElement("section");
  el.id = id;
  root.appendChild(el);
  return el;
}

export function createApp(root: HTMLElement, api: ApiClient): PlannerApp {
  return new PlannerApp(root, api);
}
