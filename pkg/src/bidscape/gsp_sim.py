"""Generalized second-price auction simulator and counterfactual replay.

The simulator produces ranked auction snapshots for a configured market:
each advertiser flips a participation coin, draws a log-normal jittered CPC
bid around its base bid, and competes for a fixed number of slots rated by
score = quality x top-slot pctr x bid. Winners pay the classic next-score
price (floored at the reserve); ranked losers are logged with zero cost so
the log carries the full ranking.

Drawn bids are quantized to micros *before* scoring, and replay shares the
same scoring and pricing helpers, so replaying a logged bid reproduces the
logged position and cost bit for bit. That makes counterfactual curves from
replay a trustworthy oracle for landscape estimators.

Determinism: every auction gets its own RNG stream derived from
(market seed, auction index), so logs are reproducible and individual
auctions can be regenerated in isolation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .auction_log import (
    AuctionSnapshot,
    ParticipantRecord,
    currency_to_micros,
    micros_to_currency,
)
from .errors import SchemaError, ValidationError


@dataclass(frozen=True)
class SimAdvertiser:
    """One simulated bidder.

    pctr_by_position holds the position-dependent CTR for each slot (length
    must equal the market's slot count, non-increasing). bid_jitter is the
    sigma of the log-normal multiplier on base_bid.
    """

    advertiser_id: str
    context: str
    base_bid: float
    bid_jitter: float
    quality: float
    pctr_by_position: tuple[float, ...]
    participation_rate: float

    def __post_init__(self) -> None:
        if not self.advertiser_id:
            raise ValidationError("advertiser_id must be non-empty")
        if not self.context:
            raise ValidationError("context must be non-empty")
        if not self.base_bid > 0:
            raise ValidationError(f"base_bid must be > 0, got {self.base_bid}")
        if self.bid_jitter < 0:
            raise ValidationError(f"bid_jitter must be >= 0, got {self.bid_jitter}")
        if not self.quality > 0:
            raise ValidationError(f"quality must be > 0, got {self.quality}")
        if not self.pctr_by_position:
            raise ValidationError("pctr_by_position must be non-empty")
        for p in self.pctr_by_position:
            if not 0 < p <= 1:
                raise ValidationError(f"pctr values must be in (0, 1], got {p}")
        for a, b in zip(self.pctr_by_position, self.pctr_by_position[1:]):
            if b > a:
                raise ValidationError("pctr_by_position must be non-increasing")
        if not 0 < self.participation_rate <= 1:
            raise ValidationError(
                f"participation_rate must be in (0, 1], got {self.participation_rate}"
            )


@dataclass(frozen=True)
class MarketConfig:
    advertisers: tuple[SimAdvertiser, ...]
    slots: int
    reserve_cpc: float
    seed: int

    def __post_init__(self) -> None:
        if self.slots < 1:
            raise ValidationError(f"slots must be >= 1, got {self.slots}")
        if self.reserve_cpc < 0:
            raise ValidationError(f"reserve_cpc must be >= 0, got {self.reserve_cpc}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")
        if not self.advertisers:
            raise ValidationError("market must have at least one advertiser")
        ids = [a.advertiser_id for a in self.advertisers]
        if len(set(ids)) != len(ids):
            raise ValidationError("advertiser ids must be unique")
        for a in self.advertisers:
            if len(a.pctr_by_position) != self.slots:
                raise ValidationError(
                    f"advertiser {a.advertiser_id!r} has {len(a.pctr_by_position)} "
                    f"pctr values for {self.slots} slots"
                )

    def advertiser(self, advertiser_id: str) -> SimAdvertiser:
        for a in self.advertisers:
            if a.advertiser_id == advertiser_id:
                return a
        raise ValidationError(f"unknown advertiser {advertiser_id!r}")

    def with_bids(self, bids: dict[str, float]) -> "MarketConfig":
        """Copy of the market with listed advertisers' base bids replaced."""
        unknown = set(bids) - {a.advertiser_id for a in self.advertisers}
        if unknown:
            raise ValidationError(f"unknown advertisers in bid policy: {sorted(unknown)}")
        new_advertisers = tuple(
            SimAdvertiser(
                advertiser_id=a.advertiser_id,
                context=a.context,
                base_bid=bids.get(a.advertiser_id, a.base_bid),
                bid_jitter=a.bid_jitter,
                quality=a.quality,
                pctr_by_position=a.pctr_by_position,
                participation_rate=a.participation_rate,
            )
            for a in self.advertisers
        )
        return MarketConfig(new_advertisers, self.slots, self.reserve_cpc, self.seed)


def _score(quality: float, top_pctr: float, bid: float) -> float:
    # shared by generation and replay; the expression order must not diverge
    return quality * top_pctr * bid


def _price_micros(next_score: Optional[float], quality: float, top_pctr: float,
                  reserve_cpc: float, bid_micro: int) -> int:
    """Second-price CPC in micros: next score unscaled by own quality terms,
    floored at the reserve, capped at the own bid."""
    if next_score is None:
        price = reserve_cpc
    else:
        price = max(reserve_cpc, next_score / (quality * top_pctr))
    return min(currency_to_micros(price), bid_micro)


def rng_for_auction(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def run_auction(
    market: MarketConfig,
    rng: np.random.Generator,
    auction_id: str = "sim-0",
    ts: int = 0,
) -> AuctionSnapshot:
    """One auction: draw participants and bids, rank, price, snapshot.

    Redraws everything (continuing the stream) in the rare event that nobody
    participates above the reserve.
    """
    reserve_micro = currency_to_micros(market.reserve_cpc)
    for _attempt in range(1000):
        entries = []  # (advertiser, bid_micro, score)
        for adv in market.advertisers:
            if rng.random() >= adv.participation_rate:
                continue
            bid = adv.base_bid
            if adv.bid_jitter > 0:
                bid = bid * float(np.exp(adv.bid_jitter * rng.standard_normal()))
            bid_micro = currency_to_micros(bid)
            if bid_micro <= 0 or bid_micro < reserve_micro:
                continue
            score = _score(adv.quality, adv.pctr_by_position[0], micros_to_currency(bid_micro))
            entries.append((adv, bid_micro, score))
        if entries:
            break
    else:
        raise ValidationError(
            "no eligible participant in 1000 attempts; check reserve and bids"
        )

    entries.sort(key=lambda e: (-e[2], e[0].advertiser_id))
    participants = []
    for idx, (adv, bid_micro, score) in enumerate(entries):
        position = idx + 1
        if position <= market.slots:
            next_score = entries[idx + 1][2] if idx + 1 < len(entries) else None
            cost_micro = _price_micros(
                next_score, adv.quality, adv.pctr_by_position[0],
                market.reserve_cpc, bid_micro,
            )
        else:
            cost_micro = 0
        participants.append(
            ParticipantRecord(
                advertiser_id=adv.advertiser_id,
                context=adv.context,
                position=position,
                ranking_score=score,
                cpc_bid=bid_micro,
                cpc_cost=cost_micro,
                pctr=adv.pctr_by_position[min(position, market.slots) - 1],
            )
        )
    return AuctionSnapshot(auction_id=auction_id, ts=ts, participants=tuple(participants))


def generate_log(
    market: MarketConfig, n_auctions: int, start_ts: int = 0
) -> list[AuctionSnapshot]:
    """n_auctions snapshots, deterministic in (market.seed, auction index)."""
    if n_auctions < 1:
        raise ValidationError(f"n_auctions must be >= 1, got {n_auctions}")
    log = []
    for i in range(n_auctions):
        rng = rng_for_auction(market.seed, i)
        log.append(run_auction(market, rng, auction_id=f"a{i:06d}", ts=start_ts + i))
    return log


def replay_bid(
    market: MarketConfig,
    snapshot: AuctionSnapshot,
    advertiser_id: str,
    bid: float,
) -> Optional[tuple[int, int]]:
    """Re-rank a logged auction with one advertiser's bid replaced.

    Other participants keep their logged scores. Returns (position,
    cost_micro) for the replaced advertiser, or None when the advertiser was
    not in the auction or the new bid falls below the reserve. cost_micro is
    0 for ranked losers.
    """
    adv = market.advertiser(advertiser_id)
    if not any(p.advertiser_id == advertiser_id for p in snapshot.participants):
        return None
    bid_micro = currency_to_micros(bid)
    reserve_micro = currency_to_micros(market.reserve_cpc)
    if bid_micro <= 0 or bid_micro < reserve_micro:
        return None
    own_score = _score(adv.quality, adv.pctr_by_position[0], micros_to_currency(bid_micro))
    ranked = [
        (p.ranking_score, p.advertiser_id)
        for p in snapshot.participants
        if p.advertiser_id != advertiser_id
    ]
    ranked.append((own_score, advertiser_id))
    ranked.sort(key=lambda e: (-e[0], e[1]))
    idx = next(i for i, e in enumerate(ranked) if e[1] == advertiser_id)
    position = idx + 1
    if position > market.slots:
        return position, 0
    next_score = ranked[idx + 1][0] if idx + 1 < len(ranked) else None
    cost_micro = _price_micros(
        next_score, adv.quality, adv.pctr_by_position[0], market.reserve_cpc, bid_micro
    )
    return position, cost_micro


@dataclass(frozen=True)
class CounterfactualPoint:
    """Replay outcome at one bid: win rate over participated auctions and
    mean eCPM cost per won impression (None when nothing was won)."""

    bid: float
    winrate: float
    ecpm_cost: Optional[float]
    participated: int


def counterfactual_curve(
    market: MarketConfig,
    log: Sequence[AuctionSnapshot],
    advertiser_id: str,
    bids: Iterable[float],
) -> list[CounterfactualPoint]:
    """Ground-truth curves by replaying the log at each candidate CPC bid."""
    adv = market.advertiser(advertiser_id)
    auctions = [s for s in log if any(p.advertiser_id == advertiser_id for p in s.participants)]
    if not auctions:
        raise ValidationError(f"advertiser {advertiser_id!r} never appears in the log")
    points = []
    for bid in bids:
        wins = 0
        cost_total = 0.0
        for snap in auctions:
            outcome = replay_bid(market, snap, advertiser_id, bid)
            if outcome is None:
                continue
            position, cost_micro = outcome
            if position <= market.slots:
                wins += 1
                cost_total += micros_to_currency(cost_micro) * adv.pctr_by_position[position - 1]
        points.append(
            CounterfactualPoint(
                bid=bid,
                winrate=wins / len(auctions),
                ecpm_cost=(cost_total / wins) if wins else None,
                participated=len(auctions),
            )
        )
    return points


# ---------------------------------------------------------------------------
# config (de)serialization

def advertiser_to_dict(a: SimAdvertiser) -> dict:
    return {
        "advertiser_id": a.advertiser_id,
        "context": a.context,
        "base_bid": a.base_bid,
        "bid_jitter": a.bid_jitter,
        "quality": a.quality,
        "pctr_by_position": list(a.pctr_by_position),
        "participation_rate": a.participation_rate,
    }


def market_to_dict(m: MarketConfig) -> dict:
    return {
        "slots": m.slots,
        "reserve_cpc": m.reserve_cpc,
        "seed": m.seed,
        "advertisers": [advertiser_to_dict(a) for a in m.advertisers],
    }


def market_from_dict(obj: dict) -> MarketConfig:
    if not isinstance(obj, dict):
        raise SchemaError("market config must be an object")
    for field_name in ("slots", "reserve_cpc", "seed", "advertisers"):
        if field_name not in obj:
            raise SchemaError(f"missing field '{field_name}'")
    raw = obj["advertisers"]
    if not isinstance(raw, list) or not raw:
        raise SchemaError("'advertisers' must be a non-empty array")
    advertisers = []
    for i, a in enumerate(raw):
        if not isinstance(a, dict):
            raise SchemaError(f"advertisers[{i}] must be an object")
        try:
            advertisers.append(
                SimAdvertiser(
                    advertiser_id=str(a["advertiser_id"]),
                    context=str(a["context"]),
                    base_bid=float(a["base_bid"]),
                    bid_jitter=float(a["bid_jitter"]),
                    quality=float(a["quality"]),
                    pctr_by_position=tuple(float(p) for p in a["pctr_by_position"]),
                    participation_rate=float(a["participation_rate"]),
                )
            )
        except KeyError as exc:
            raise SchemaError(f"advertisers[{i}]: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"advertisers[{i}]: {exc}") from exc
        except ValidationError as exc:
            raise SchemaError(f"advertisers[{i}]: {exc}") from exc
    try:
        return MarketConfig(
            advertisers=tuple(advertisers),
            slots=int(obj["slots"]),
            reserve_cpc=float(obj["reserve_cpc"]),
            seed=int(obj["seed"]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def load_market(source: Union[str, IO[str]]) -> MarketConfig:
    text = source if isinstance(source, str) else source.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}") from exc
    return market_from_dict(obj)
