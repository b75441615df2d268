"""Shared fixtures: reference auction, reference binning inputs, sim markets."""

from __future__ import annotations

import pytest

from bidscape.auction_log import AuctionSnapshot, ParticipantRecord, currency_to_micros
from bidscape.gsp_sim import MarketConfig, SimAdvertiser
from bidscape.landscape import RangeObservation, build_landscape
from bidscape.optimizer import CampaignInputs


@pytest.fixture
def three_bidder_snapshot() -> AuctionSnapshot:
    """A three-participant ranked auction with mixed contexts; the reference
    input for range-derivation tests."""
    return AuctionSnapshot(
        auction_id="ref-1",
        ts=1,
        participants=(
            ParticipantRecord(
                advertiser_id="9192982670",
                context="1_mobile",
                position=1,
                ranking_score=3.117e-4,
                cpc_bid=currency_to_micros(5.0),
                cpc_cost=currency_to_micros(0.31),
                pctr=0.002588,
            ),
            ParticipantRecord(
                advertiser_id="9620472854",
                context="1_desktop",
                position=2,
                ranking_score=2.387e-4,
                cpc_bid=currency_to_micros(1.581),
                cpc_cost=currency_to_micros(0.5),
                pctr=8.0119e-4,
            ),
            ParticipantRecord(
                advertiser_id="9575604786",
                context="1_mobile",
                position=3,
                ranking_score=2.312e-4,
                cpc_bid=currency_to_micros(0.5),
                cpc_cost=currency_to_micros(0.45),
                pctr=5.7167e-4,
            ),
        ),
    )


REFERENCE_RANGES = [
    # (ecpm_up, ecpm_dn, ecpm_cost): three observations whose binning at
    # 0.01 gives the reference pdf/cdf rows used across the suite
    (0.04, 0.01, 0.008),
    (0.05, 0.02, 0.015),
    (0.05, 0.03, 0.02),
]


def reference_observations() -> list[RangeObservation]:
    return [
        RangeObservation("adv", "ctx", 1, up, dn, cost)
        for up, dn, cost in REFERENCE_RANGES
    ]


@pytest.fixture
def reference_landscape():
    """The three-observation landscape binned at 0.01 (max index 5)."""
    return build_landscape(
        reference_observations(), bin_size=0.01, group="ref", built_at=100
    )


@pytest.fixture
def planning_inputs() -> CampaignInputs:
    """1M impressions, pctr 1%, pcvr 10%: the optimizer fixture inputs."""
    return CampaignInputs(impressions=1_000_000, pctr=0.01, pcvr=0.1)


def duopoly_market(seed: int = 7, jitter: float = 0.2) -> MarketConfig:
    """Two bidders, one slot: everything is hand-enumerable."""
    return MarketConfig(
        advertisers=(
            SimAdvertiser("a1", "ctx", 1.0, jitter, 1.0, (0.05,), 1.0),
            SimAdvertiser("a2", "ctx", 1.2, jitter, 1.0, (0.05,), 1.0),
        ),
        slots=1,
        reserve_cpc=0.05,
        seed=seed,
    )
