"""Constrained bid recommendation on top of a bid landscape.

The planning model is a fixed pool of auction opportunities pushed through
the landscape curves:

    clicks(bid)      = impressions x winrate(bid) x pctr
    conversions(bid) = clicks(bid) x pcvr
    cpa(bid)         = ecpm_cost(bid) / (pctr x pcvr)
    spend(bid)       = clicks(bid) x ecpm_cost(bid) / pctr

recommend_bid maximises conversions subject to a CPA cap (target x
(1 + tolerance)), then checks the winning bid against the budget. When the
budget cannot carry that bid the caller gets the best affordable bid plus
two what-if adjustments: the budget that would unlock the CPA-optimal bid,
and the CPA cap the current budget can actually sustain.

Bids here are eCPM per impression, the landscape's native scale; divide or
multiply by pctr to move between CPC and eCPM terms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

from .errors import CostUndefinedError, EmptyLandscapeError, ValidationError
from .landscape import BidLandscape, query_cost, query_winrate


@dataclass(frozen=True)
class CampaignInputs:
    """Opportunity volume and funnel rates for one campaign."""

    impressions: float
    pctr: float
    pcvr: float

    def __post_init__(self) -> None:
        if self.impressions < 0:
            raise ValidationError(f"impressions must be >= 0, got {self.impressions}")
        if not 0 < self.pctr <= 1:
            raise ValidationError(f"pctr must be in (0, 1], got {self.pctr}")
        if not 0 < self.pcvr <= 1:
            raise ValidationError(f"pcvr must be in (0, 1], got {self.pcvr}")


@dataclass(frozen=True)
class CpaGoal:
    """Target CPA with headroom plus a spend budget, both in currency."""

    target_cpa: float
    budget: float
    tolerance: float = 0.05

    def __post_init__(self) -> None:
        if self.target_cpa <= 0:
            raise ValidationError(f"target_cpa must be > 0, got {self.target_cpa}")
        if self.budget <= 0:
            raise ValidationError(f"budget must be > 0, got {self.budget}")
        if self.tolerance < 0:
            raise ValidationError(f"tolerance must be >= 0, got {self.tolerance}")

    @property
    def cpa_cap(self) -> float:
        return self.target_cpa * (1.0 + self.tolerance)


class RecommendationStatus(str, enum.Enum):
    FEASIBLE = "feasible"
    BUDGET_LIMITED = "budget_limited"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Recommendation:
    """A recommended eCPM bid with its predicted outcomes.

    adjusted_budget: budget that would fund the CPA-optimal bid (set when
    the budget binds). adjusted_cpa: CPA achievable within the current
    budget (budget-limited) or the best CPA the landscape offers at all
    (CPA-infeasible).
    """

    bid: float
    winrate: float
    clicks: float
    conversions: float
    spend: float
    cpa: float
    status: RecommendationStatus
    adjusted_budget: Optional[float] = None
    adjusted_cpa: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "bid": self.bid,
            "winrate": self.winrate,
            "clicks": self.clicks,
            "conversions": self.conversions,
            "spend": self.spend,
            "cpa": self.cpa,
            "status": self.status.value,
            "adjusted_budget": self.adjusted_budget,
            "adjusted_cpa": self.adjusted_cpa,
        }


def predict_clicks(landscape: BidLandscape, inputs: CampaignInputs, bid: float) -> float:
    return inputs.impressions * query_winrate(landscape, bid) * inputs.pctr


def predict_conversions(clicks: float, pcvr: float) -> float:
    if not 0 < pcvr <= 1:
        raise ValidationError(f"pcvr must be in (0, 1], got {pcvr}")
    return clicks * pcvr


def predict_cpa(landscape: BidLandscape, inputs: CampaignInputs, bid: float) -> float:
    """Cost per conversion at a bid; raises CostUndefinedError off-support."""
    return query_cost(landscape, bid) / (inputs.pctr * inputs.pcvr)


def predict_spend(landscape: BidLandscape, inputs: CampaignInputs, bid: float) -> float:
    clicks = predict_clicks(landscape, inputs, bid)
    if clicks == 0.0:
        return 0.0
    return clicks * (query_cost(landscape, bid) / inputs.pctr)


def candidate_bids(landscape: BidLandscape) -> list[float]:
    """The bid grid the optimizer scans: one bid per bin, plus one past the
    last populated bin (where the curves have flattened)."""
    return [k * landscape.bin_size for k in range(1, landscape.max_index + 2)]


class _Row(NamedTuple):
    bid: float
    winrate: float
    clicks: float
    conversions: float
    spend: float
    cpa: float


def _scan(landscape: BidLandscape, inputs: CampaignInputs) -> list[_Row]:
    rows = []
    for bid in candidate_bids(landscape):
        try:
            cost = query_cost(landscape, bid)
        except CostUndefinedError:
            continue
        winrate = query_winrate(landscape, bid)
        clicks = inputs.impressions * winrate * inputs.pctr
        conversions = clicks * inputs.pcvr
        spend = 0.0 if clicks == 0.0 else clicks * (cost / inputs.pctr)
        cpa = cost / (inputs.pctr * inputs.pcvr)
        rows.append(_Row(bid, winrate, clicks, conversions, spend, cpa))
    return rows


def _best(rows: Iterable[_Row]) -> _Row:
    # most conversions, ties to the cheaper bid
    return min(rows, key=lambda r: (-r.conversions, r.bid))


def _make(row: _Row, status: RecommendationStatus,
          adjusted_budget: Optional[float], adjusted_cpa: Optional[float]) -> Recommendation:
    return Recommendation(
        bid=row.bid,
        winrate=row.winrate,
        clicks=row.clicks,
        conversions=row.conversions,
        spend=row.spend,
        cpa=row.cpa,
        status=status,
        adjusted_budget=adjusted_budget,
        adjusted_cpa=adjusted_cpa,
    )


def _affordable_cpa(rows: list[_Row], budget: float) -> Optional[float]:
    """CPA at the largest positive-winrate bid the budget can carry."""
    affordable = [r for r in rows if r.winrate > 0 and r.spend <= budget]
    if not affordable:
        return None
    return max(affordable, key=lambda r: r.bid).cpa


def recommend_bid(
    landscape: BidLandscape, inputs: CampaignInputs, goal: CpaGoal
) -> Recommendation:
    """Maximise conversions subject to CPA cap and budget.

    feasible: the conversion-optimal bid under the CPA cap also fits the
    budget. budget_limited: it does not; the returned bid is the
    conversion-optimal affordable one (cap ignored, since lower bids only
    improve CPA on the priced grid's feasible side) and both adjustments are
    populated. infeasible: either no bid meets the cap (returns the
    CPA-minimising bid with adjusted_cpa) or nothing is affordable (returns
    the cheapest bid with adjusted_budget).
    """
    rows = _scan(landscape, inputs)
    if not rows:
        raise EmptyLandscapeError(
            f"landscape for group {landscape.group!r} has no priced bins"
        )
    within_cap = [r for r in rows if r.cpa <= goal.cpa_cap]
    if not within_cap:
        best_cpa = min(rows, key=lambda r: (r.cpa, r.bid))
        return _make(best_cpa, RecommendationStatus.INFEASIBLE,
                     adjusted_budget=None, adjusted_cpa=best_cpa.cpa)

    star = _best(within_cap)
    if star.spend <= goal.budget:
        return _make(star, RecommendationStatus.FEASIBLE,
                     adjusted_budget=None, adjusted_cpa=None)

    affordable = [r for r in rows if r.spend <= goal.budget]
    adjusted_budget = star.spend
    adjusted_cpa = _affordable_cpa(rows, goal.budget)
    if not affordable:
        cheapest = min(rows, key=lambda r: (r.spend, r.bid))
        return _make(cheapest, RecommendationStatus.INFEASIBLE,
                     adjusted_budget=adjusted_budget, adjusted_cpa=adjusted_cpa)
    return _make(_best(affordable), RecommendationStatus.BUDGET_LIMITED,
                 adjusted_budget=adjusted_budget, adjusted_cpa=adjusted_cpa)


def budget_exhausting_cpa(
    landscape: BidLandscape, inputs: CampaignInputs, budget: float
) -> Optional[float]:
    """CPA at the bid that spends the budget as fully as the grid allows;
    None when no positive-winrate bid is affordable."""
    if budget <= 0:
        raise ValidationError(f"budget must be > 0, got {budget}")
    return _affordable_cpa(_scan(landscape, inputs), budget)


def bid_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid [start, stop] with half-ulp slack at the top."""
    if step <= 0:
        raise ValidationError(f"step must be > 0, got {step}")
    if stop < start:
        raise ValidationError(f"stop must be >= start, got [{start}, {stop}]")
    out = []
    k = 0
    while True:
        bid = start + k * step
        if bid > stop + step * 1e-9:
            break
        out.append(bid)
        k += 1
    return out


def curve_point(landscape: BidLandscape, inputs: CampaignInputs, bid: float) -> dict:
    """One row of the planning curves at an arbitrary eCPM bid; cost-driven
    fields are None where the landscape has no support."""
    winrate = query_winrate(landscape, bid)
    clicks = inputs.impressions * winrate * inputs.pctr
    try:
        cost = query_cost(landscape, bid)
    except CostUndefinedError:
        cost = None
    if cost is None:
        spend = 0.0 if clicks == 0.0 else None
        cpa = None
    else:
        spend = 0.0 if clicks == 0.0 else clicks * (cost / inputs.pctr)
        cpa = cost / (inputs.pctr * inputs.pcvr)
    return {
        "bid": bid,
        "winrate": winrate,
        "cost": cost,
        "clicks": clicks,
        "conversions": clicks * inputs.pcvr,
        "spend": spend,
        "cpa": cpa,
    }


def curve_points(
    landscape: BidLandscape, inputs: CampaignInputs, bids: Iterable[float]
) -> list[dict]:
    return [curve_point(landscape, inputs, bid) for bid in bids]
