"""Bid landscape estimation and target-CPA bid recommendation.

Learns non-parametric win-rate and cost curves from ranked second-price
auction logs, recommends conversion-maximising bids under CPA and budget
constraints, and ships the surrounding tooling: baselines, a deterministic
auction simulator with counterfactual replay, evaluation metrics, a model
store, a CLI, and an HTTP API.
"""

from .auction_log import (
    AuctionSnapshot,
    GroupingKey,
    ParseResult,
    ParticipantRecord,
    estimate_rates,
    group_snapshots,
    parse_log,
    write_log,
)
from .errors import (
    BidscapeError,
    CostUndefinedError,
    EmptyLandscapeError,
    ModelIntegrityError,
    ModelNotFoundError,
    SchemaError,
    StoreError,
    ValidationError,
)
from .landscape import (
    DEFAULT_BIN_SIZE,
    DEFAULT_MAX_ECPM,
    BidLandscape,
    RangeObservation,
    bin_index,
    build_landscape,
    build_landscapes,
    derive_ecpm_ranges,
    group_observations,
    merge_landscapes,
    query_cost,
    query_winrate,
    win_range_observations,
)
from .optimizer import (
    CampaignInputs,
    CpaGoal,
    Recommendation,
    RecommendationStatus,
    budget_exhausting_cpa,
    predict_clicks,
    predict_conversions,
    predict_cpa,
    predict_spend,
    recommend_bid,
)
from .store import ModelStore

__version__ = "0.1.0"

__all__ = [
    "AuctionSnapshot",
    "BidLandscape",
    "BidscapeError",
    "CampaignInputs",
    "CostUndefinedError",
    "CpaGoal",
    "DEFAULT_BIN_SIZE",
    "DEFAULT_MAX_ECPM",
    "EmptyLandscapeError",
    "GroupingKey",
    "ModelIntegrityError",
    "ModelNotFoundError",
    "ModelStore",
    "ParseResult",
    "ParticipantRecord",
    "RangeObservation",
    "Recommendation",
    "RecommendationStatus",
    "SchemaError",
    "StoreError",
    "ValidationError",
    "bin_index",
    "budget_exhausting_cpa",
    "build_landscape",
    "build_landscapes",
    "derive_ecpm_ranges",
    "estimate_rates",
    "group_observations",
    "group_snapshots",
    "merge_landscapes",
    "parse_log",
    "predict_clicks",
    "predict_conversions",
    "predict_cpa",
    "predict_spend",
    "query_cost",
    "query_winrate",
    "recommend_bid",
    "win_range_observations",
    "write_log",
]
