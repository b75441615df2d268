"""Auction log model: validated snapshots, parsing, grouping, rate estimation.

A log is a sequence of auction snapshots. Each snapshot records every ranked
participant of one auction: advertiser, serving context, 1-based position,
the ranking score the exchange sorted on, the CPC bid and the CPC cost
actually charged (both in integer micros of currency), and the predicted CTR
at the served position.

Two interchange formats are supported and documented in docs/log_schema.md:
JSON Lines (one auction object per line) and CSV (one participant per row,
rows of the same auction contiguous). Parsing is permissive at the stream
level: malformed lines or invariant-violating auctions are reported with
line numbers while the remaining snapshots are returned.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

from .errors import SchemaError, ValidationError

MICROS_PER_UNIT = 1_000_000

_CSV_COLUMNS = (
    "auction_id",
    "ts",
    "advertiser",
    "context",
    "position",
    "score",
    "bid_micro",
    "cost_micro",
    "pctr",
)


def micros_to_currency(micros: int) -> float:
    return micros / MICROS_PER_UNIT


def currency_to_micros(amount: float) -> int:
    return int(round(amount * MICROS_PER_UNIT))


@dataclass(frozen=True)
class ParticipantRecord:
    """One advertiser's entry in a single auction.

    Invariants enforced on construction: position >= 1, ranking_score > 0,
    0 <= cpc_cost <= cpc_bid, 0 < pctr <= 1.
    """

    advertiser_id: str
    context: str
    position: int
    ranking_score: float
    cpc_bid: int
    cpc_cost: int
    pctr: float

    def __post_init__(self) -> None:
        if not self.advertiser_id:
            raise ValidationError("advertiser_id must be non-empty")
        if not self.context:
            raise ValidationError("context must be non-empty")
        if self.position < 1:
            raise ValidationError(f"position must be >= 1, got {self.position}")
        if not self.ranking_score > 0:
            raise ValidationError(f"ranking_score must be > 0, got {self.ranking_score}")
        if self.cpc_bid < 0:
            raise ValidationError(f"cpc_bid must be >= 0, got {self.cpc_bid}")
        if not 0 <= self.cpc_cost <= self.cpc_bid:
            raise ValidationError(
                f"cpc_cost must satisfy 0 <= cost <= bid, got cost={self.cpc_cost} bid={self.cpc_bid}"
            )
        if not 0 < self.pctr <= 1:
            raise ValidationError(f"pctr must be in (0, 1], got {self.pctr}")


@dataclass(frozen=True)
class AuctionSnapshot:
    """All ranked participants of one auction, sorted by position.

    Positions must be exactly 1..n with no gaps, and ranking_score must be
    non-increasing with position (the exchange sorted on it).
    """

    auction_id: str
    ts: int
    participants: tuple[ParticipantRecord, ...]

    def __post_init__(self) -> None:
        if not self.auction_id:
            raise ValidationError("auction_id must be non-empty")
        if self.ts < 0:
            raise ValidationError(f"ts must be >= 0, got {self.ts}")
        if not self.participants:
            raise ValidationError("snapshot must have at least one participant")
        positions = [p.position for p in self.participants]
        if positions != list(range(1, len(positions) + 1)):
            raise ValidationError(f"positions must be exactly 1..n, got {positions}")
        scores = [p.ranking_score for p in self.participants]
        for a, b in zip(scores, scores[1:]):
            if b > a:
                raise ValidationError("ranking_score must be non-increasing with position")


class GroupingKey(enum.Enum):
    """How snapshots and observations are pooled into model groups."""

    GLOBAL = "global"
    BY_CONTEXT = "by_context"
    BY_ADVERTISER = "by_advertiser"
    BY_ADVERTISER_CONTEXT = "by_advertiser_context"

    def label(self, advertiser_id: str, context: str) -> str:
        """Group label for a participant under this key."""
        if self is GroupingKey.GLOBAL:
            return "global"
        if self is GroupingKey.BY_CONTEXT:
            return context
        if self is GroupingKey.BY_ADVERTISER:
            return advertiser_id
        return f"{advertiser_id}|{context}"


@dataclass(frozen=True)
class ParseError:
    line: int
    reason: str


@dataclass
class ParseResult:
    snapshots: list[AuctionSnapshot] = field(default_factory=list)
    errors: list[ParseError] = field(default_factory=list)


def participant_to_dict(p: ParticipantRecord) -> dict:
    return {
        "advertiser": p.advertiser_id,
        "context": p.context,
        "position": p.position,
        "score": p.ranking_score,
        "bid_micro": p.cpc_bid,
        "cost_micro": p.cpc_cost,
        "pctr": p.pctr,
    }


def snapshot_to_dict(snapshot: AuctionSnapshot) -> dict:
    return {
        "auction_id": snapshot.auction_id,
        "ts": snapshot.ts,
        "participants": [participant_to_dict(p) for p in snapshot.participants],
    }


def _require(obj: dict, key: str, types: tuple, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    value = obj[key]
    # bool is an int subclass; never acceptable where a number is expected
    if isinstance(value, bool) or not isinstance(value, types):
        raise SchemaError(f"{where}: field '{key}' has wrong type")
    return value

def participant_from_dict(obj: dict, where: str = "participant") -> ParticipantRecord:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: participant must be an object")
    return ParticipantRecord(
        advertiser_id=str(_require(obj, "advertiser", (str, int), where)),
        context=str(_require(obj, "context", (str,), where)),
        position=_require(obj, "position", (int,), where),
        ranking_score=float(_require(obj, "score", (int, float), where)),
        cpc_bid=_require(obj, "bid_micro", (int,), where),
        cpc_cost=_require(obj, "cost_micro", (int,), where),
        pctr=float(_require(obj, "pctr", (int, float), where)),
    )


def snapshot_from_dict(obj: dict) -> AuctionSnapshot:
    if not isinstance(obj, dict):
        raise SchemaError("auction must be an object")
    auction_id = str(_require(obj, "auction_id", (str, int), "auction"))
    ts = _require(obj, "ts", (int,), auction_id)
    raw = obj.get("participants")
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{auction_id}: 'participants' must be a non-empty array")
    participants = sorted(
        (participant_from_dict(p, where=auction_id) for p in raw),
        key=lambda p: p.position,
    )
    return AuctionSnapshot(auction_id=auction_id, ts=ts, participants=tuple(participants))


def _as_stream(source: Union[str, IO[str]]) -> IO[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def _parse_jsonl(stream: IO[str]) -> ParseResult:
    result = ParseResult()
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            result.errors.append(ParseError(lineno, f"invalid JSON: {exc.msg}"))
            continue
        try:
            result.snapshots.append(snapshot_from_dict(obj))
        except (SchemaError, ValidationError) as exc:
            result.errors.append(ParseError(lineno, str(exc)))
    return result


def _csv_row_to_participant(row: dict, where: str) -> ParticipantRecord:
    try:
        return ParticipantRecord(
            advertiser_id=row["advertiser"],
            context=row["context"],
            position=int(row["position"]),
            ranking_score=float(row["score"]),
            cpc_bid=int(row["bid_micro"]),
            cpc_cost=int(row["cost_micro"]),
            pctr=float(row["pctr"]),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{where}: missing or empty column {exc}") from exc
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def _parse_csv(stream: IO[str]) -> ParseResult:
    result = ParseResult()
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        return result
    missing = set(_CSV_COLUMNS) - set(reader.fieldnames)
    if missing:
        result.errors.append(ParseError(1, f"missing columns: {sorted(missing)}"))
        return result

    # Rows of one auction must be contiguous; a bad row poisons its auction
    # only, not the stream.
    pending: list[ParticipantRecord] = []
    pending_key = None  # (auction_id, ts)
    pending_line = 0
    pending_bad = False

    def flush() -> None:
        nonlocal pending, pending_key, pending_bad
        if pending_key is not None and not pending_bad:
            auction_id, ts = pending_key
            try:
                snap = AuctionSnapshot(
                    auction_id=auction_id,
                    ts=ts,
                    participants=tuple(sorted(pending, key=lambda p: p.position)),
                )
                result.snapshots.append(snap)
            except ValidationError as exc:
                result.errors.append(ParseError(pending_line, f"{auction_id}: {exc}"))
        pending = []
        pending_key = None
        pending_bad = False

    for row in reader:
        lineno = reader.line_num
        auction_id = row.get("auction_id") or ""
        try:
            ts = int(row["ts"]) if row.get("ts") not in (None, "") else 0
            if not auction_id:
                raise SchemaError("missing auction_id")
            key = (auction_id, ts)
            if key != pending_key:
                flush()
                pending_key = key
                pending_line = lineno
            pending.append(_csv_row_to_participant(row, where=auction_id))
        except (SchemaError, ValidationError, ValueError) as exc:
            result.errors.append(ParseError(lineno, str(exc)))
            if pending_key is not None and auction_id == pending_key[0]:
                pending_bad = True
    flush()
    return result


def parse_log(source: Union[str, IO[str]], fmt: str = "jsonl") -> ParseResult:
    """Parse a log from a string or text stream.

    Returns all valid snapshots plus per-line errors for everything else;
    never raises on malformed content. fmt is "jsonl" or "csv".
    """
    stream = _as_stream(source)
    if fmt == "jsonl":
        return _parse_jsonl(stream)
    if fmt == "csv":
        return _parse_csv(stream)
    raise ValueError(f"unknown log format: {fmt!r}")


def write_log(snapshots: Iterable[AuctionSnapshot], stream: IO[str], fmt: str = "jsonl") -> None:
    """Serialize snapshots to a text stream; inverse of parse_log.

    Floats are written with shortest round-trip repr, so parse(write(x)) == x
    field for field.
    """
    if fmt == "jsonl":
        for snap in snapshots:
            stream.write(json.dumps(snapshot_to_dict(snap)))
            stream.write("\n")
        return
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for snap in snapshots:
            for p in snap.participants:
                writer.writerow(
                    [
                        snap.auction_id,
                        snap.ts,
                        p.advertiser_id,
                        p.context,
                        p.position,
                        repr(p.ranking_score),
                        p.cpc_bid,
                        p.cpc_cost,
                        repr(p.pctr),
                    ]
                )
        return
    raise ValueError(f"unknown log format: {fmt!r}")


def dumps_log(snapshots: Iterable[AuctionSnapshot], fmt: str = "jsonl") -> str:
    buf = io.StringIO()
    write_log(snapshots, buf, fmt)
    return buf.getvalue()


def group_snapshots(
    snapshots: Iterable[AuctionSnapshot], key: GroupingKey
) -> dict[str, list[AuctionSnapshot]]:
    """Partition snapshots into model groups.

    A snapshot joins every group labeled by one of its participants, so a
    mixed-context auction appears (whole) under each context it touches; the
    sum of group sizes can exceed the input size. Under GLOBAL the partition
    is exactly the input.
    """
    groups: dict[str, list[AuctionSnapshot]] = {}
    for snap in snapshots:
        seen: set[str] = set()
        for p in snap.participants:
            label = key.label(p.advertiser_id, p.context)
            if label not in seen:
                seen.add(label)
                groups.setdefault(label, []).append(snap)
    return groups


def estimate_rates(events: Iterable[tuple[float, float, float]]) -> tuple[float, float]:
    """Pooled CTR/CVR point estimates from (impressions, clicks, conversions).

    Uses add-one smoothing so both rates are defined and in (0, 1) even for
    empty or click-free histories: pctr = (clicks+1)/(impressions+2),
    pcvr = (conversions+1)/(clicks+2) over the pooled totals.
    """
    impressions = clicks = conversions = 0.0
    for imp, clk, conv in events:
        if not 0 <= conv <= clk <= imp:
            raise ValidationError(
                f"event must satisfy 0 <= conversions <= clicks <= impressions, got {(imp, clk, conv)}"
            )
        impressions += imp
        clicks += clk
        conversions += conv
    pctr = (clicks + 1.0) / (impressions + 2.0)
    pcvr = (conversions + 1.0) / (clicks + 2.0)
    return pctr, pcvr
