"""Non-parametric bid landscape: eCPM range derivation, binning, queries.

The landscape answers "what win rate and eCPM cost would this eCPM bid see?"
without assuming a distribution family. It is learned from ranked auction
snapshots in two steps:

1. Range derivation. For every participant i and every position j of an
   auction, project what eCPM bid interval (ecpm_dn, ecpm_up] would have put
   participant i at position j, using the ratios of logged ranking scores.
   The participant's own eCPM cost rides along as the cost observation for
   that interval. Pairs whose interval is empty (up < dn) are dropped.

2. Binning. Intervals are histogrammed at a fixed bin size: pdf_dn counts
   interval lower indices, pdf_up counts upper indices, and pdf_cost_dn /
   pdf_cost_up accumulate the eCPM cost mass at the same indices. Win rate
   at bin i falls out of the running sums as (cdf_dn[i] - cdf_up[i]) / n:
   the fraction of observations whose interval straddles bin i. Expected
   eCPM cost at bin i is the straddling cost mass divided by the straddling
   count.

All eCPM values are per impression (cost x pctr, no x1000), and all bids
passed to query functions are on that same scale. Landscapes are grouped by
serving context and/or advertiser; observations land in exactly one group.

Determinism: per-bin cost masses are accumulated with math.fsum over
per-index groups, so building from the same observations yields bit-identical
landscapes regardless of observation order.
"""

from __future__ import annotations

import io
import json
import math
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Union

import numpy as np

from . import _native
from .auction_log import AuctionSnapshot, GroupingKey, micros_to_currency
from .errors import (
    CostUndefinedError,
    EmptyLandscapeError,
    SchemaError,
    ValidationError,
)

DEFAULT_BIN_SIZE = 0.01
DEFAULT_MAX_ECPM = 9.99

# floor(v / bin + eps): keeps exact multiples of the bin size in their own
# bin despite IEEE division (0.03 / 0.01 == 2.9999999999999996).
_BIN_EPS = 1e-9
# A bin whose straddling count is at or below this is treated as unpopulated
# when computing costs; guards decayed merges against ulp-scale residues.
_MIN_SUPPORT = 1e-9
_COST_SLACK = 1e-9


def bin_index(value: float, bin_size: float) -> int:
    """Bin index of an eCPM value: floor(value / bin_size + 1e-9)."""
    if bin_size <= 0:
        raise ValidationError(f"bin_size must be > 0, got {bin_size}")
    return int(math.floor(value / bin_size + _BIN_EPS))


@dataclass(frozen=True)
class RangeObservation:
    """One projected (position, eCPM interval, eCPM cost) observation.

    Invariants: position >= 1, 0 <= ecpm_dn <= ecpm_up, and
    0 <= ecpm_cost <= ecpm_up (up to 1e-9 relative slack for second-price
    equality cases).
    """

    advertiser_id: str
    context: str
    position: int
    ecpm_up: float
    ecpm_dn: float
    ecpm_cost: float

    def __post_init__(self) -> None:
        if self.position < 1:
            raise ValidationError(f"position must be >= 1, got {self.position}")
        if not (math.isfinite(self.ecpm_up) and math.isfinite(self.ecpm_dn)):
            raise ValidationError("ecpm bounds must be finite")
        if self.ecpm_dn < 0:
            raise ValidationError(f"ecpm_dn must be >= 0, got {self.ecpm_dn}")
        if self.ecpm_up < self.ecpm_dn:
            raise ValidationError(
                f"ecpm_up must be >= ecpm_dn, got up={self.ecpm_up} dn={self.ecpm_dn}"
            )
        if not 0 <= self.ecpm_cost <= self.ecpm_up * (1.0 + _COST_SLACK):
            raise ValidationError(
                f"ecpm_cost must be in [0, ecpm_up], got cost={self.ecpm_cost} up={self.ecpm_up}"
            )


def derive_ecpm_ranges(
    snapshot: AuctionSnapshot, max_ecpm: float = DEFAULT_MAX_ECPM
) -> list[RangeObservation]:
    """All candidate-position range observations from one auction snapshot.

    For participant i at position j the interval answers "what eCPM bid lands
    at position j?": bounded by neighbouring score ratios scaled into the
    participant's own eCPM units, with max_ecpm capping the open top end at
    position 1 and the participant's own eCPM bid flooring the bottom end at
    the last position. Pairs with an empty interval are omitted, which also
    means a participant can have no observation at some positions.
    """
    if max_ecpm <= 0:
        raise ValidationError(f"max_ecpm must be > 0, got {max_ecpm}")
    parts = snapshot.participants
    scores = np.array([p.ranking_score for p in parts], dtype=np.float64)
    bids = np.array([micros_to_currency(p.cpc_bid) for p in parts], dtype=np.float64)
    pctrs = np.array([p.pctr for p in parts], dtype=np.float64)
    costs = np.array([micros_to_currency(p.cpc_cost) for p in parts], dtype=np.float64)
    starts = np.array([0, len(parts)], dtype=np.int64)
    src, pos, up, dn, cost = _native.derive_ranges_batch(
        scores, bids, pctrs, costs, starts, float(max_ecpm)
    )
    out = []
    for k in range(len(src)):
        p = parts[int(src[k])]
        out.append(
            RangeObservation(
                advertiser_id=p.advertiser_id,
                context=p.context,
                position=int(pos[k]),
                ecpm_up=float(up[k]),
                ecpm_dn=float(dn[k]),
                ecpm_cost=float(cost[k]),
            )
        )
    return out


class BidLandscape:
    """Binned win-rate and cost distributions for one model group.

    pdf_dn / pdf_up map bin index -> observation count (floats: decayed
    merges produce fractional mass; fresh builds are integer-valued).
    pdf_cost_dn / pdf_cost_up map bin index -> summed eCPM cost mass.
    n counts every observation offered to the builder, including ones
    skipped for falling below bin 1.
    """

    __slots__ = (
        "group",
        "bin_size",
        "n",
        "pdf_dn",
        "pdf_up",
        "pdf_cost_dn",
        "pdf_cost_up",
        "built_at",
        "max_index",
        "_cdf_dn",
        "_cdf_up",
        "_cdf_cost_dn",
        "_cdf_cost_up",
        "_winrate",
        "_winrate_cummax",
        "_cost_value",
        "_cost_support",
    )

    def __init__(
        self,
        group: str,
        bin_size: float,
        n: float,
        pdf_dn: dict[int, float],
        pdf_up: dict[int, float],
        pdf_cost_dn: dict[int, float],
        pdf_cost_up: dict[int, float],
        built_at: int = 0,
    ) -> None:
        if not group:
            raise ValidationError("group must be non-empty")
        if bin_size <= 0:
            raise ValidationError(f"bin_size must be > 0, got {bin_size}")
        if n < 0:
            raise ValidationError(f"n must be >= 0, got {n}")
        for name, pdf in (
            ("pdf_dn", pdf_dn),
            ("pdf_up", pdf_up),
            ("pdf_cost_dn", pdf_cost_dn),
            ("pdf_cost_up", pdf_cost_up),
        ):
            for k, v in pdf.items():
                if not isinstance(k, int) or k < 1:
                    raise ValidationError(f"{name} keys must be integers >= 1, got {k!r}")
                if not (math.isfinite(v) and v >= 0):
                    raise ValidationError(f"{name}[{k}] must be finite and >= 0, got {v!r}")
        self.group = group
        self.bin_size = float(bin_size)
        self.n = float(n)
        self.pdf_dn = dict(pdf_dn)
        self.pdf_up = dict(pdf_up)
        self.pdf_cost_dn = dict(pdf_cost_dn)
        self.pdf_cost_up = dict(pdf_cost_up)
        self.built_at = int(built_at)

        max_index = 0
        for pdf in (self.pdf_dn, self.pdf_up, self.pdf_cost_dn, self.pdf_cost_up):
            if pdf:
                max_index = max(max_index, max(pdf))
        self.max_index = max_index
        self._compute_cdfs()

        total_dn = float(self._cdf_dn[-1])
        total_up = float(self._cdf_up[-1])
        if not math.isclose(total_dn, total_up, rel_tol=1e-6, abs_tol=1e-9):
            raise ValidationError(
                f"lower/upper count masses disagree: {total_dn} vs {total_up}"
            )
        if total_dn > self.n * (1.0 + 1e-9) + 1e-9:
            raise ValidationError(
                f"binned count {total_dn} exceeds observation count n={self.n}"
            )

    def _compute_cdfs(self) -> None:
        size = self.max_index + 1
        dense = {}
        for name, pdf in (
            ("dn", self.pdf_dn),
            ("up", self.pdf_up),
            ("cost_dn", self.pdf_cost_dn),
            ("cost_up", self.pdf_cost_up),
        ):
            arr = np.zeros(size, dtype=np.float64)
            for k, v in pdf.items():
                arr[k] = v
            dense[name] = np.cumsum(arr)
        self._cdf_dn = dense["dn"]
        self._cdf_up = dense["up"]
        self._cdf_cost_dn = dense["cost_dn"]
        self._cdf_cost_up = dense["cost_up"]

        support = self._cdf_dn - self._cdf_up
        if self.n > 0:
            wr = np.maximum(support, 0.0) / self.n
        else:
            wr = np.zeros(size, dtype=np.float64)
        wr[0] = 0.0
        self._winrate = wr
        self._winrate_cummax = np.maximum.accumulate(wr)

        cost_value = np.full(size, math.nan)
        cost_support = np.full(size, 0, dtype=np.int64)
        last = 0
        for i in range(1, size):
            if support[i] > _MIN_SUPPORT:
                cost_value[i] = (self._cdf_cost_dn[i] - self._cdf_cost_up[i]) / support[i]
                last = i
            cost_support[i] = last
        self._cost_value = cost_value
        self._cost_support = cost_support

    # cdf views are derived state; expose read-only copies by index
    @property
    def cdf_dn(self) -> np.ndarray:
        return self._cdf_dn

    @property
    def cdf_up(self) -> np.ndarray:
        return self._cdf_up

    @property
    def cdf_cost_dn(self) -> np.ndarray:
        return self._cdf_cost_dn

    @property
    def cdf_cost_up(self) -> np.ndarray:
        return self._cdf_cost_up

    @classmethod
    def empty(
        cls, group: str, bin_size: float = DEFAULT_BIN_SIZE, built_at: int = 0
    ) -> "BidLandscape":
        return cls(group, bin_size, 0.0, {}, {}, {}, {}, built_at)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BidLandscape):
            return NotImplemented
        return (
            self.group == other.group
            and self.bin_size == other.bin_size
            and self.n == other.n
            and self.pdf_dn == other.pdf_dn
            and self.pdf_up == other.pdf_up
            and self.pdf_cost_dn == other.pdf_cost_dn
            and self.pdf_cost_up == other.pdf_cost_up
            and self.built_at == other.built_at
        )

    def __repr__(self) -> str:
        return (
            f"BidLandscape(group={self.group!r}, bin_size={self.bin_size}, "
            f"n={self.n}, max_index={self.max_index}, built_at={self.built_at})"
        )


def _build(
    group: str,
    dn: np.ndarray,
    up: np.ndarray,
    cost: np.ndarray,
    bin_size: float,
    n_offered: int,
    built_at: Optional[int],
) -> BidLandscape:
    if bin_size <= 0:
        raise ValidationError(f"bin_size must be > 0, got {bin_size}")
    idx_dn = np.floor(dn / bin_size + _BIN_EPS).astype(np.int64)
    idx_up = np.floor(up / bin_size + _BIN_EPS).astype(np.int64)
    mask = (idx_dn >= 1) & (idx_up >= 1)
    if not bool(mask.any()):
        raise EmptyLandscapeError(f"no observations at or above bin 1 for group {group!r}")

    kept_dn = idx_dn[mask].tolist()
    kept_up = idx_up[mask].tolist()
    kept_cost = cost[mask].tolist()

    pdf_dn: dict[int, float] = {}
    pdf_up: dict[int, float] = {}
    for i in kept_dn:
        pdf_dn[i] = pdf_dn.get(i, 0.0) + 1.0
    for i in kept_up:
        pdf_up[i] = pdf_up.get(i, 0.0) + 1.0

    cost_groups_dn: dict[int, list[float]] = defaultdict(list)
    cost_groups_up: dict[int, list[float]] = defaultdict(list)
    for i, c in zip(kept_dn, kept_cost):
        cost_groups_dn[i].append(c)
    for i, c in zip(kept_up, kept_cost):
        cost_groups_up[i].append(c)
    pdf_cost_dn = {i: math.fsum(v) for i, v in cost_groups_dn.items()}
    pdf_cost_up = {i: math.fsum(v) for i, v in cost_groups_up.items()}

    return BidLandscape(
        group=group,
        bin_size=bin_size,
        n=float(n_offered),
        pdf_dn=pdf_dn,
        pdf_up=pdf_up,
        pdf_cost_dn=pdf_cost_dn,
        pdf_cost_up=pdf_cost_up,
        built_at=int(time.time()) if built_at is None else built_at,
    )


def build_landscape(
    observations: Iterable[RangeObservation],
    *,
    bin_size: float = DEFAULT_BIN_SIZE,
    group: str = "global",
    built_at: Optional[int] = None,
) -> BidLandscape:
    """Bin range observations into a landscape for one group.

    Observations whose interval falls entirely below bin 1 are skipped but
    still counted in n. Raises EmptyLandscapeError when nothing remains.
    """
    obs = list(observations)
    dn = np.array([o.ecpm_dn for o in obs], dtype=np.float64)
    up = np.array([o.ecpm_up for o in obs], dtype=np.float64)
    cost = np.array([o.ecpm_cost for o in obs], dtype=np.float64)
    return _build(group, dn, up, cost, bin_size, len(obs), built_at)


def group_observations(
    observations: Iterable[RangeObservation], key: GroupingKey
) -> dict[str, list[RangeObservation]]:
    """Partition observations into model groups; each lands in exactly one."""
    groups: dict[str, list[RangeObservation]] = {}
    for o in observations:
        groups.setdefault(key.label(o.advertiser_id, o.context), []).append(o)
    return groups


def build_landscapes(
    snapshots: Iterable[AuctionSnapshot],
    *,
    key: GroupingKey = GroupingKey.BY_CONTEXT,
    bin_size: float = DEFAULT_BIN_SIZE,
    max_ecpm: float = DEFAULT_MAX_ECPM,
    built_at: Optional[int] = None,
) -> dict[str, BidLandscape]:
    """Full pipeline: derive ranges from snapshots, group, bin per group.

    Groups where every observation falls below bin 1 are omitted rather than
    raising; an empty input yields an empty dict.
    """
    if max_ecpm <= 0:
        raise ValidationError(f"max_ecpm must be > 0, got {max_ecpm}")
    snaps = list(snapshots)
    advertisers: list[str] = []
    contexts: list[str] = []
    scores: list[float] = []
    bids: list[float] = []
    pctrs: list[float] = []
    costs: list[float] = []
    starts = [0]
    for snap in snaps:
        for p in snap.participants:
            advertisers.append(p.advertiser_id)
            contexts.append(p.context)
            scores.append(p.ranking_score)
            bids.append(micros_to_currency(p.cpc_bid))
            pctrs.append(p.pctr)
            costs.append(micros_to_currency(p.cpc_cost))
        starts.append(len(scores))
    if not scores:
        return {}
    src, _pos, up, dn, cost = _native.derive_ranges_batch(
        np.asarray(scores, dtype=np.float64),
        np.asarray(bids, dtype=np.float64),
        np.asarray(pctrs, dtype=np.float64),
        np.asarray(costs, dtype=np.float64),
        np.asarray(starts, dtype=np.int64),
        float(max_ecpm),
    )
    by_label: dict[str, list[int]] = {}
    for k in range(len(src)):
        flat = int(src[k])
        label = key.label(advertisers[flat], contexts[flat])
        by_label.setdefault(label, []).append(k)

    result: dict[str, BidLandscape] = {}
    for label, emission_idx in by_label.items():
        sel = np.asarray(emission_idx, dtype=np.intp)
        try:
            result[label] = _build(
                label, dn[sel], up[sel], cost[sel], bin_size, len(emission_idx), built_at
            )
        except EmptyLandscapeError:
            continue
    return result


def win_range_observations(
    snapshots: Iterable[AuctionSnapshot],
    *,
    slots: int,
    max_ecpm: float = DEFAULT_MAX_ECPM,
) -> list[RangeObservation]:
    """One observation per (advertiser, auction): the union of its winnable
    slot ranges.

    Per-slot tuples describe the bid range holding one specific position.
    When the market's slots are interchangeable for the bidder (position-
    constant pCTR), "winning an impression" means landing in any of the top
    `slots` positions, so the per-slot ranges collapse into a single
    interval from the lowest slot floor to the highest slot ceiling. The
    participant's logged eCPM cost rides along; participants whose cost
    exceeds every affordable slot ceiling are dropped, mirroring the
    per-slot cost filter.

    Landscapes built from these observations estimate P(win | participated)
    directly, which is what a multi-slot market's win-rate oracle measures.
    """
    if slots < 1:
        raise ValidationError(f"slots must be >= 1, got {slots}")
    if max_ecpm <= 0:
        raise ValidationError(f"max_ecpm must be > 0, got {max_ecpm}")
    advertisers: list[str] = []
    contexts: list[str] = []
    positions: list[int] = []
    scores: list[float] = []
    bids: list[float] = []
    pctrs: list[float] = []
    costs: list[float] = []
    starts = [0]
    for snap in snapshots:
        for p in snap.participants:
            advertisers.append(p.advertiser_id)
            contexts.append(p.context)
            positions.append(p.position)
            scores.append(p.ranking_score)
            bids.append(micros_to_currency(p.cpc_bid))
            pctrs.append(p.pctr)
            costs.append(micros_to_currency(p.cpc_cost))
        starts.append(len(scores))
    if not scores:
        return []
    src, pos, up, dn, _cost = _native.derive_ranges_batch(
        np.asarray(scores, dtype=np.float64),
        np.asarray(bids, dtype=np.float64),
        np.asarray(pctrs, dtype=np.float64),
        np.asarray(costs, dtype=np.float64),
        np.asarray(starts, dtype=np.int64),
        float(max_ecpm),
    )
    in_slot = pos <= slots
    src_s = src[in_slot]
    n_flat = len(scores)
    dn_min = np.full(n_flat, np.inf)
    up_max = np.full(n_flat, -np.inf)
    np.minimum.at(dn_min, src_s, dn[in_slot])
    np.maximum.at(up_max, src_s, up[in_slot])

    out: list[RangeObservation] = []
    for flat in np.nonzero(np.isfinite(dn_min))[0]:
        ecpm_cost = costs[flat] * pctrs[flat]
        if ecpm_cost > up_max[flat] * (1.0 + _COST_SLACK):
            continue
        out.append(
            RangeObservation(
                advertiser_id=advertisers[flat],
                context=contexts[flat],
                position=positions[flat],
                ecpm_up=float(up_max[flat]),
                ecpm_dn=float(dn_min[flat]),
                ecpm_cost=ecpm_cost,
            )
        )
    return out


def merge_landscapes(a: BidLandscape, b: BidLandscape, decay: float = 1.0) -> BidLandscape:
    """Roll b into a with the old mass decayed: new = decay * a + b.

    decay=1 is a plain additive merge; decay in (0, 1) ages the old model.
    Groups and bin sizes must match. With decay=1 the result equals a batch
    build over the union of the original observations.
    """
    if a.group != b.group:
        raise ValidationError(f"group mismatch: {a.group!r} vs {b.group!r}")
    if a.bin_size != b.bin_size:
        raise ValidationError(f"bin_size mismatch: {a.bin_size} vs {b.bin_size}")
    if not 0 < decay <= 1:
        raise ValidationError(f"decay must be in (0, 1], got {decay}")

    def merged(pa: dict[int, float], pb: dict[int, float]) -> dict[int, float]:
        out = {}
        for k in pa.keys() | pb.keys():
            out[k] = decay * pa.get(k, 0.0) + pb.get(k, 0.0)
        return out

    return BidLandscape(
        group=a.group,
        bin_size=a.bin_size,
        n=decay * a.n + b.n,
        pdf_dn=merged(a.pdf_dn, b.pdf_dn),
        pdf_up=merged(a.pdf_up, b.pdf_up),
        pdf_cost_dn=merged(a.pdf_cost_dn, b.pdf_cost_dn),
        pdf_cost_up=merged(a.pdf_cost_up, b.pdf_cost_up),
        built_at=max(a.built_at, b.built_at),
    )


def query_winrate(landscape: BidLandscape, bid: float, monotone: bool = False) -> float:
    """Win-rate estimate at an eCPM bid.

    Bids below bin 1 return 0; bids past the last populated bin clamp to it.
    monotone=True returns the running maximum over lower bins instead of the
    raw bin value, trading fidelity to the data for a non-decreasing curve.
    """
    i = bin_index(bid, landscape.bin_size)
    if i <= 0 or landscape.max_index < 1 or landscape.n <= 0:
        return 0.0
    i = min(i, landscape.max_index)
    if monotone:
        return float(landscape._winrate_cummax[i])
    return float(landscape._winrate[i])


def query_cost(landscape: BidLandscape, bid: float) -> float:
    """Expected eCPM cost at an eCPM bid.

    When the bid's own bin has no straddling observations the nearest
    populated lower bin answers. Raises CostUndefinedError when no populated
    bin exists at or below the bid.
    """
    i = bin_index(bid, landscape.bin_size)
    if i >= 1 and landscape.max_index >= 1:
        i = min(i, landscape.max_index)
        j = int(landscape._cost_support[i])
        if j >= 1:
            return float(landscape._cost_value[j])
    raise CostUndefinedError(
        f"cost undefined at or below bid {bid!r} for group {landscape.group!r}"
    )


# ---------------------------------------------------------------------------
# serialization

def _intify(v: float) -> Union[int, float]:
    iv = int(v)
    return iv if iv == v else v


def landscape_to_dict(landscape: BidLandscape) -> dict:
    """JSON-ready form; cdfs are recomputed on load, not stored."""

    def counts(pdf: dict[int, float]) -> dict[str, Union[int, float]]:
        return {str(k): _intify(pdf[k]) for k in sorted(pdf)}

    def masses(pdf: dict[int, float]) -> dict[str, float]:
        return {str(k): float(pdf[k]) for k in sorted(pdf)}

    return {
        "group": landscape.group,
        "bin_size": landscape.bin_size,
        "n": _intify(landscape.n),
        "pdf_dn": counts(landscape.pdf_dn),
        "pdf_up": counts(landscape.pdf_up),
        "pdf_cost_dn": masses(landscape.pdf_cost_dn),
        "pdf_cost_up": masses(landscape.pdf_cost_up),
        "built_at": landscape.built_at,
    }


def _pdf_from_obj(obj: object, name: str) -> dict[int, float]:
    if not isinstance(obj, dict):
        raise SchemaError(f"'{name}' must be an object")
    out = {}
    for k, v in obj.items():
        try:
            ik = int(k)
        except (TypeError, ValueError):
            raise SchemaError(f"'{name}' key {k!r} is not an integer") from None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"'{name}'[{k}] must be a number")
        out[ik] = float(v)
    return out


def landscape_from_dict(obj: dict) -> BidLandscape:
    if not isinstance(obj, dict):
        raise SchemaError("landscape must be an object")
    for field_name in ("group", "bin_size", "n", "pdf_dn", "pdf_up",
                       "pdf_cost_dn", "pdf_cost_up", "built_at"):
        if field_name not in obj:
            raise SchemaError(f"missing field '{field_name}'")
    group = obj["group"]
    if not isinstance(group, str) or not group:
        raise SchemaError("'group' must be a non-empty string")
    bin_size = obj["bin_size"]
    n = obj["n"]
    built_at = obj["built_at"]
    if isinstance(bin_size, bool) or not isinstance(bin_size, (int, float)):
        raise SchemaError("'bin_size' must be a number")
    if isinstance(n, bool) or not isinstance(n, (int, float)):
        raise SchemaError("'n' must be a number")
    if isinstance(built_at, bool) or not isinstance(built_at, int):
        raise SchemaError("'built_at' must be an integer")
    try:
        return BidLandscape(
            group=group,
            bin_size=float(bin_size),
            n=float(n),
            pdf_dn=_pdf_from_obj(obj["pdf_dn"], "pdf_dn"),
            pdf_up=_pdf_from_obj(obj["pdf_up"], "pdf_up"),
            pdf_cost_dn=_pdf_from_obj(obj["pdf_cost_dn"], "pdf_cost_dn"),
            pdf_cost_up=_pdf_from_obj(obj["pdf_cost_up"], "pdf_cost_up"),
            built_at=built_at,
        )
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def dumps_landscape(landscape: BidLandscape) -> str:
    return json.dumps(landscape_to_dict(landscape), indent=2)


def loads_landscape(text: str) -> BidLandscape:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}") from exc
    return landscape_from_dict(obj)


# range-observation JSONL, the persisted form of step 1

def range_to_dict(o: RangeObservation) -> dict:
    return {
        "advertiser": o.advertiser_id,
        "context": o.context,
        "position": o.position,
        "ecpm_up": o.ecpm_up,
        "ecpm_dn": o.ecpm_dn,
        "ecpm_cost": o.ecpm_cost,
    }


def range_from_dict(obj: dict) -> RangeObservation:
    if not isinstance(obj, dict):
        raise SchemaError("range observation must be an object")
    for field_name in ("advertiser", "context", "position", "ecpm_up", "ecpm_dn", "ecpm_cost"):
        if field_name not in obj:
            raise SchemaError(f"missing field '{field_name}'")
    try:
        return RangeObservation(
            advertiser_id=str(obj["advertiser"]),
            context=str(obj["context"]),
            position=int(obj["position"]),
            ecpm_up=float(obj["ecpm_up"]),
            ecpm_dn=float(obj["ecpm_dn"]),
            ecpm_cost=float(obj["ecpm_cost"]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc


def read_ranges(source: Union[str, IO[str]]) -> list[RangeObservation]:
    """Strict JSONL reader for range observations; raises on the first bad line."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    out = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
        try:
            out.append(range_from_dict(obj))
        except SchemaError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from exc
    return out


def write_ranges(observations: Iterable[RangeObservation], stream: IO[str]) -> None:
    for o in observations:
        stream.write(json.dumps(range_to_dict(o)))
        stream.write("\n")
