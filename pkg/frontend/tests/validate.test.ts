/** The client-side validator must reject exactly what the server would
 * 400: for every recorded request/verdict pair, the client's error list
 * equals the server's, field for field, message for message, in order. */

import { describe, expect, it } from "vitest";

import type { FieldError, GridParams, PlannerForm } from "../src/types.js";
import { validateForm, validateGrid } from "../src/validate.js";
import { fixture } from "./fixture_server.js";

interface RecordedCase {
  payload: PlannerForm;
  status: number;
  body?: { errors: FieldError[] };
}

interface RecordedCurvesCase {
  query: Record<string, string>;
  status: number;
  body: { errors: FieldError[] };
}

describe("form validation mirrors recorded server verdicts", () => {
  const cases = fixture<RecordedCase[]>("validation_cases");

  it.each(cases.map((c, i) => [i, c] as const))(
    "case %i matches the server",
    (_i, c) => {
      const clientErrors = validateForm(c.payload);
      if (c.status === 200) {
        expect(clientErrors).toEqual([]);
      } else {
        expect(clientErrors).toEqual(c.body!.errors);
      }
    },
  );

  it("covers both acceptance and a multi-field rejection", () => {
    expect(cases.some((c) => c.status === 200)).toBe(true);
    expect(cases.some((c) => c.status === 400 && c.body!.errors.length > 1)).toBe(
      true,
    );
  });
});

describe("grid validation mirrors recorded curves verdicts", () => {
  const cases = fixture<RecordedCurvesCase[]>("curves_validation_cases");

  it.each(cases.map((c, i) => [i, c] as const))(
    "case %i matches the server",
    (_i, c) => {
      const grid: GridParams = {
        from: Number(c.query.from),
        to: Number(c.query.to),
        step: Number(c.query.step),
      };
      expect(validateGrid(grid)).toEqual(c.body.errors);
    },
  );
});
