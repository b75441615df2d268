"""Evaluation toolkit: forecast accuracy metrics and simulated A/B reports.

Accuracy is measured in relative terms (MAPE, RMSPE) against known
outcomes: either analytic ground truth backed out of aggregate campaign
outcomes, or counterfactual replay in the simulator. The A/B side compares
a baseline bid policy against an optimized one on paired simulated traffic
and reports spend-weighted increase ratios for bids, clicks, and ROI.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Mapping, Optional, Sequence, Union

from .baselines import CpaHistoryPoint, li_predict_cpa, nns_predict_cpa
from .errors import SchemaError, ValidationError
from .gsp_sim import MarketConfig, generate_log, micros_to_currency
from .landscape import BidLandscape
from .optimizer import CampaignInputs, predict_cpa


@dataclass(frozen=True)
class ForecastPair:
    actual: float
    predicted: float

    def __post_init__(self) -> None:
        if not self.actual > 0:
            raise ValidationError(f"actual must be > 0, got {self.actual}")
        if not math.isfinite(self.predicted):
            raise ValidationError(f"predicted must be finite, got {self.predicted}")


def mape(pairs: Sequence[ForecastPair]) -> float:
    """Mean absolute percentage error: mean |predicted - actual| / actual."""
    if not pairs:
        raise ValidationError("pairs must be non-empty")
    return sum(abs(p.predicted - p.actual) / p.actual for p in pairs) / len(pairs)


def rmspe(pairs: Sequence[ForecastPair]) -> float:
    """Root mean squared percentage error; >= MAPE on the same pairs."""
    if not pairs:
        raise ValidationError("pairs must be non-empty")
    return math.sqrt(
        sum(((p.predicted - p.actual) / p.actual) ** 2 for p in pairs) / len(pairs)
    )


def ground_truth_curves(
    impressions: float, clicks: float, spend: float, ctr: float
) -> tuple[float, float]:
    """Back out (winrate, per-impression eCPM cost) from aggregate outcomes.

    winrate = clicks / (impressions x ctr); cost = (spend / clicks) x ctr.
    Needs clicks > 0 to price, and the implied winrate must not exceed 1.
    """
    if not impressions > 0:
        raise ValidationError(f"impressions must be > 0, got {impressions}")
    if not clicks > 0:
        raise ValidationError(f"clicks must be > 0, got {clicks}")
    if spend < 0:
        raise ValidationError(f"spend must be >= 0, got {spend}")
    if not 0 < ctr <= 1:
        raise ValidationError(f"ctr must be in (0, 1], got {ctr}")
    winrate = clicks / (impressions * ctr)
    if winrate > 1 + 1e-9:
        raise ValidationError(
            f"implied winrate {winrate} exceeds 1; outcomes inconsistent with ctr"
        )
    return winrate, (spend / clicks) * ctr


@dataclass(frozen=True)
class CampaignRecord:
    """One labelled evaluation campaign; current_bid is on the eCPM scale."""

    campaign_id: str
    group: str
    current_bid: float
    true_cpa: float
    pctr: float
    pcvr: float
    history: tuple[CpaHistoryPoint, ...] = ()

    def __post_init__(self) -> None:
        if not self.campaign_id:
            raise ValidationError("campaign_id must be non-empty")
        if not self.group:
            raise ValidationError("group must be non-empty")
        if not self.current_bid > 0:
            raise ValidationError(f"current_bid must be > 0, got {self.current_bid}")
        if not self.true_cpa > 0:
            raise ValidationError(f"true_cpa must be > 0, got {self.true_cpa}")
        if not 0 < self.pctr <= 1:
            raise ValidationError(f"pctr must be in (0, 1], got {self.pctr}")
        if not 0 < self.pcvr <= 1:
            raise ValidationError(f"pcvr must be in (0, 1], got {self.pcvr}")


def load_eval_dataset(source: Union[str, IO[str]]) -> list[CampaignRecord]:
    """Read the JSON evaluation dataset (see docs/formats.md)."""
    text = source if isinstance(source, str) else source.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("campaigns"), list):
        raise SchemaError("dataset must be an object with a 'campaigns' array")
    campaigns = []
    for i, c in enumerate(obj["campaigns"]):
        if not isinstance(c, dict):
            raise SchemaError(f"campaigns[{i}] must be an object")
        try:
            history = tuple(
                CpaHistoryPoint(bid=float(h["bid"]), cpa=float(h["cpa"]))
                for h in c.get("history", [])
            )
            campaigns.append(
                CampaignRecord(
                    campaign_id=str(c["campaign_id"]),
                    group=str(c["group"]),
                    current_bid=float(c["current_bid"]),
                    true_cpa=float(c["true_cpa"]),
                    pctr=float(c["pctr"]),
                    pcvr=float(c["pcvr"]),
                    history=history,
                )
            )
        except KeyError as exc:
            raise SchemaError(f"campaigns[{i}]: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"campaigns[{i}]: {exc}") from exc
        except ValidationError as exc:
            raise SchemaError(f"campaigns[{i}]: {exc}") from exc
    return campaigns


EVAL_METHODS = ("ours", "nns", "li", "external")


def eval_cpa_forecast(
    campaigns: Sequence[CampaignRecord],
    method: str,
    landscapes: Optional[Mapping[str, BidLandscape]] = None,
    predictions: Optional[Mapping[str, float]] = None,
) -> dict:
    """MAPE/RMSPE of one CPA prediction method over labelled campaigns.

    "ours" reads the landscape for each campaign's group; "nns"/"li" use the
    campaign's own (bid, CPA) history; "external" scores a supplied
    campaign_id -> prediction mapping.
    """
    if method not in EVAL_METHODS:
        raise ValidationError(f"method must be one of {EVAL_METHODS}, got {method!r}")
    if not campaigns:
        raise ValidationError("campaigns must be non-empty")
    if method == "external" and predictions is None:
        raise ValidationError("method 'external' requires a predictions mapping")
    if method == "ours" and landscapes is None:
        raise ValidationError("method 'ours' requires landscapes")

    pairs = []
    for c in campaigns:
        if method == "ours":
            landscape = landscapes.get(c.group)
            if landscape is None:
                raise ValidationError(f"no landscape for group {c.group!r}")
            inputs = CampaignInputs(impressions=1.0, pctr=c.pctr, pcvr=c.pcvr)
            predicted = predict_cpa(landscape, inputs, c.current_bid)
        elif method == "nns":
            predicted = nns_predict_cpa(c.history, c.current_bid)
        elif method == "li":
            predicted = li_predict_cpa(c.history, c.current_bid)
        else:
            if c.campaign_id not in predictions:
                raise SchemaError(f"no external prediction for campaign {c.campaign_id!r}")
            predicted = float(predictions[c.campaign_id])
        pairs.append(ForecastPair(actual=c.true_cpa, predicted=predicted))
    return {"method": method, "n": len(pairs), "mape": mape(pairs), "rmspe": rmspe(pairs)}


# ---------------------------------------------------------------------------
# simulated A/B

@dataclass(frozen=True)
class CampaignOutcome:
    """Aggregate simulated outcomes for one advertiser over a log."""

    auctions: int
    wins: int
    clicks: float
    spend: float


def campaign_outcomes(
    log: Sequence, market: MarketConfig
) -> dict[str, CampaignOutcome]:
    """Per-advertiser expected outcomes: clicks = sum of pctr over won
    impressions, spend = sum of CPC cost x pctr (CPC billing in expectation)."""
    acc: dict[str, list[float]] = {
        a.advertiser_id: [0, 0, 0.0, 0.0] for a in market.advertisers
    }
    for snap in log:
        for p in snap.participants:
            row = acc.get(p.advertiser_id)
            if row is None:
                continue
            row[0] += 1
            if p.position <= market.slots:
                row[1] += 1
                row[2] += p.pctr
                row[3] += micros_to_currency(p.cpc_cost) * p.pctr
    return {
        aid: CampaignOutcome(auctions=r[0], wins=r[1], clicks=r[2], spend=r[3])
        for aid, r in acc.items()
    }


@dataclass(frozen=True)
class AbRecord:
    campaign_id: str
    bid_current: float
    bid_recommended: float
    spend: float
    clicks_current: float
    clicks_recommended: float
    roi_current: Optional[float]
    roi_recommended: Optional[float]

    def to_dict(self) -> dict:
        return {
            "campaign_id": self.campaign_id,
            "bid_current": self.bid_current,
            "bid_recommended": self.bid_recommended,
            "spend": self.spend,
            "clicks_current": self.clicks_current,
            "clicks_recommended": self.clicks_recommended,
            "roi_current": self.roi_current,
            "roi_recommended": self.roi_recommended,
        }


def _weighted_increase(triples: Sequence[tuple[float, Optional[float], Optional[float]]]) -> float:
    """Weighted mean of (rec - cur)/cur over usable campaigns.

    A campaign is usable when its weight is positive and both sides of the
    ratio are defined with a positive current value; weights renormalize
    over the usable set.
    """
    usable = [
        (w, cur, rec)
        for w, cur, rec in triples
        if w > 0 and cur is not None and cur > 0 and rec is not None
    ]
    total = sum(w for w, _, _ in usable)
    if total <= 0:
        raise ValidationError("no campaign with positive weight and defined ratio")
    return sum(w * (rec - cur) / cur for w, cur, rec in usable) / total


def bir(records: Sequence[AbRecord]) -> float:
    """Spend-weighted bid increase ratio."""
    return _weighted_increase(
        [(r.spend, r.bid_current, r.bid_recommended) for r in records]
    )


def cir(records: Sequence[AbRecord]) -> float:
    """Spend-weighted click increase ratio."""
    return _weighted_increase(
        [(r.spend, r.clicks_current, r.clicks_recommended) for r in records]
    )


def rir(records: Sequence[AbRecord]) -> float:
    """Spend-weighted ROI increase ratio; ROI here is clicks per unit spend
    (a fixed per-campaign conversion rate cancels out of the ratio)."""
    return _weighted_increase(
        [(r.spend, r.roi_current, r.roi_recommended) for r in records]
    )


def simulated_ab(
    market: MarketConfig,
    baseline_bids: Mapping[str, float],
    optimized_bids: Mapping[str, float],
    n_auctions: int,
) -> dict:
    """Paired A/B: replay the same market seed under two CPC bid policies.

    Both policies must cover the same campaigns (advertisers they set bids
    for); uncovered advertisers keep their configured bids and act as
    background competition in both arms. Weights come from baseline spend.
    """
    if set(baseline_bids) != set(optimized_bids):
        raise ValidationError("baseline and optimized policies must cover the same campaigns")
    if not baseline_bids:
        raise ValidationError("policies must cover at least one campaign")
    log_a = generate_log(market.with_bids(dict(baseline_bids)), n_auctions)
    log_b = generate_log(market.with_bids(dict(optimized_bids)), n_auctions)
    out_a = campaign_outcomes(log_a, market)
    out_b = campaign_outcomes(log_b, market)

    records = []
    for cid in sorted(baseline_bids):
        a = out_a[cid]
        b = out_b[cid]
        records.append(
            AbRecord(
                campaign_id=cid,
                bid_current=baseline_bids[cid],
                bid_recommended=optimized_bids[cid],
                spend=a.spend,
                clicks_current=a.clicks,
                clicks_recommended=b.clicks,
                roi_current=(a.clicks / a.spend) if a.spend > 0 else None,
                roi_recommended=(b.clicks / b.spend) if b.spend > 0 else None,
            )
        )
    if not any(r.spend > 0 for r in records):
        raise ValidationError("baseline arm spent nothing; nothing to weight by")
    return {
        "bir": bir(records),
        "cir": cir(records),
        "rir": rir(records),
        "records": records,
    }
