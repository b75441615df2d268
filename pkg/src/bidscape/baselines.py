"""Reference predictors the landscape estimator is evaluated against.

Win-rate baselines: a right-censored survival estimator (losses only bound
the clearing price from below), a two-parameter log-normal fit to winning
prices, and flat-rate curves. CPA baselines: nearest-neighbour lookup and
piecewise-linear interpolation over (bid, CPA) history.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class PricedOutcome:
    """One auction attempt: the price involved and whether it won.

    For wins the price is the clearing price; for losses it is the losing
    bid, which right-censors the unobserved clearing price.
    """

    price: float
    won: bool

    def __post_init__(self) -> None:
        if not self.price > 0:
            raise ValidationError(f"price must be > 0, got {self.price}")


def survival_winrate(outcomes: Sequence[PricedOutcome], query_bid: float) -> float:
    """Win-rate at a bid from censored outcomes, prices discretized to cents.

    Product-limit estimate: walking the distinct winning prices b_j below the
    query, the chance of still losing shrinks by (n_j - d_j) / n_j, where n_j
    counts outcomes priced at or above b_j and d_j the wins exactly at b_j.
    Returns 1 - survival. Censored-only input gives 0 everywhere.
    """
    if not outcomes:
        raise ValidationError("outcomes must be non-empty")
    if not query_bid > 0:
        raise ValidationError(f"query_bid must be > 0, got {query_bid}")
    cents = [int(round(o.price * 100)) for o in outcomes]
    query_cents = int(round(query_bid * 100))
    events = sorted({c for c, o in zip(cents, outcomes) if o.won})
    survival = 1.0
    for b in events:
        if b >= query_cents:
            break
        at_risk = sum(1 for c in cents if c >= b)
        deaths = sum(1 for c, o in zip(cents, outcomes) if c == b and o.won)
        survival *= (at_risk - deaths) / at_risk
    return 1.0 - survival


@dataclass(frozen=True)
class LogNormalParams:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")


def lognormal_fit(prices: Iterable[float]) -> LogNormalParams:
    """Moment fit of log-prices: mu = mean, sigma = population std."""
    arr = np.asarray(list(prices), dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("prices must be non-empty")
    if not np.all(arr > 0):
        raise ValidationError("prices must be > 0")
    logs = np.log(arr)
    mu = float(np.mean(logs))
    sigma = float(np.sqrt(np.mean((logs - mu) ** 2)))
    return LogNormalParams(mu=mu, sigma=sigma)


def lognormal_winrate(params: LogNormalParams, bid: float) -> float:
    """P(price <= bid) under the fitted log-normal; a step at exp(mu) when
    sigma is zero."""
    if not bid > 0:
        raise ValidationError(f"bid must be > 0, got {bid}")
    x = math.log(bid)
    if params.sigma == 0.0:
        if x > params.mu:
            return 1.0
        if x < params.mu:
            return 0.0
        return 0.5
    z = (x - params.mu) / (params.sigma * math.sqrt(2.0))
    return 0.5 * (1.0 + math.erf(z))


def flat_curves(winrate_level: float, cost_ratio: float, bid: float) -> tuple[float, float]:
    """Bid-independent win rate and proportional CPC cost: the null model."""
    if not 0 < winrate_level <= 1:
        raise ValidationError(f"winrate_level must be in (0, 1], got {winrate_level}")
    if not 0 < cost_ratio <= 1:
        raise ValidationError(f"cost_ratio must be in (0, 1], got {cost_ratio}")
    if not bid > 0:
        raise ValidationError(f"bid must be > 0, got {bid}")
    return winrate_level, cost_ratio * bid


@dataclass(frozen=True)
class CpaHistoryPoint:
    bid: float
    cpa: float

    def __post_init__(self) -> None:
        if not self.bid > 0:
            raise ValidationError(f"bid must be > 0, got {self.bid}")
        if not self.cpa > 0:
            raise ValidationError(f"cpa must be > 0, got {self.cpa}")


def nearest_point(points: Sequence[tuple[float, float]], query: float):
    """The (x, y) point with x closest to query; ties go to the smaller x."""
    if not points:
        raise ValidationError("points must be non-empty")
    return min(points, key=lambda p: (abs(p[0] - query), p[0]))


def nns_predict_cpa(history: Sequence[CpaHistoryPoint], bid: float) -> float:
    """CPA of the historical point whose bid is nearest the queried bid."""
    if not history:
        raise ValidationError("history must be non-empty")
    return nearest_point([(p.bid, p.cpa) for p in history], bid)[1]


def li_predict_cpa(history: Sequence[CpaHistoryPoint], bid: float) -> float:
    """Piecewise-linear CPA over history, clamped flat outside the bid range.

    Needs at least two points; duplicate bids collapse to the earlier point's
    value at the exact query.
    """
    if len(history) < 2:
        raise ValidationError("history must have at least 2 points")
    pts = sorted(((p.bid, p.cpa) for p in history), key=lambda p: p[0])
    if bid <= pts[0][0]:
        return pts[0][1]
    if bid >= pts[-1][0]:
        return pts[-1][1]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x0 <= bid <= x1:
            if x1 == x0:
                return y0
            return y0 + (y1 - y0) * (bid - x0) / (x1 - x0)
    raise AssertionError("unreachable: bid inside range but no segment found")
