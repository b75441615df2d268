/** Request and response shapes of the /v1 JSON API, mirrored verbatim. */

export interface PlannerForm {
  group: string;
  impressions: number;
  pctr: number;
  pcvr: number;
  cpa_goal: number;
  budget: number;
  tolerance: number;
}

export interface GridParams {
  from: number;
  to: number;
  step: number;
}

export interface CurvePoint {
  bid: number;
  winrate: number;
  cost: number | null;
  clicks: number;
  conversions: number;
  spend: number | null;
  cpa: number | null;
}

export interface CurvesResponse {
  group: string;
  bin_size: number;
  points: CurvePoint[];
}

export type RecommendationStatus = "feasible" | "budget_limited" | "infeasible";

export interface Recommendation {
  group: string;
  bid: number;
  winrate: number;
  clicks: number;
  conversions: number;
  spend: number;
  cpa: number;
  status: RecommendationStatus;
  adjusted_budget: number | null;
  adjusted_cpa: number | null;
}

export interface FieldError {
  field: string;
  message: string;
}
