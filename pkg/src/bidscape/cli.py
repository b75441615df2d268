"""Command-line interface.

Subcommands: ingest, build, curves, recommend, simulate, eval, serve.
Exit codes: 0 success, 1 usage error (bad flags/arguments), 2 data error
(unreadable or invalid input files, unknown groups, empty models).

The model store location comes from --store, else the BIDSCAPE_STORE
environment variable, else ./bidscape_store.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional

from .auction_log import GroupingKey, parse_log
from .errors import BidscapeError
from .gsp_sim import generate_log, load_market
from .landscape import (
    DEFAULT_BIN_SIZE,
    DEFAULT_MAX_ECPM,
    build_landscape,
    build_landscapes,
    derive_ecpm_ranges,
    group_observations,
    read_ranges,
)
from .optimizer import CampaignInputs, CpaGoal, bid_grid, curve_points, recommend_bid
from .store import ModelStore

from .auction_log import dumps_log


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this CLI reserves 2 for data errors
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _log_format(path: str, explicit: Optional[str]) -> str:
    if explicit:
        return explicit
    return "csv" if path.endswith(".csv") else "jsonl"


def _store(args: argparse.Namespace) -> ModelStore:
    return ModelStore.from_env(args.store)


def cmd_ingest(args: argparse.Namespace) -> int:
    text = _read_text(args.log)
    result = parse_log(text, fmt=_log_format(args.log, args.format))
    if result.snapshots:
        _store(args).append_log(result.snapshots, name=args.name)
    report = {
        "accepted": len(result.snapshots),
        "rejected": len(result.errors),
        "errors": [{"line": e.line, "reason": e.reason} for e in result.errors],
    }
    print(json.dumps(report, indent=2))
    if result.errors and not result.snapshots:
        return 2
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    store = _store(args)
    key = GroupingKey(args.group_by)
    built_at = args.built_at

    snapshots = []
    if args.input:
        for path in args.input:
            result = parse_log(_read_text(path), fmt=_log_format(path, args.format))
            for e in result.errors:
                print(f"{path}:{e.line}: {e.reason}", file=sys.stderr)
            snapshots.extend(result.snapshots)
    else:
        snapshots = list(store.iter_log_snapshots())

    observations = []
    for snap in snapshots:
        observations.extend(derive_ecpm_ranges(snap, max_ecpm=args.max_ecpm))
    if args.ranges:
        observations.extend(read_ranges(_read_text(args.ranges)))

    if not observations:
        print("no range observations to build from", file=sys.stderr)
        return 2

    built = {}
    for label, obs in group_observations(observations, key).items():
        try:
            built[label] = build_landscape(
                obs, bin_size=args.bin_size, group=label, built_at=built_at
            )
        except BidscapeError:
            continue
    if not built:
        print("every group was empty after binning", file=sys.stderr)
        return 2
    store.save_all(built.values())
    print(json.dumps({"groups": sorted(built)}, indent=2))
    return 0


def cmd_curves(args: argparse.Namespace) -> int:
    landscape = _store(args).load(args.group)
    inputs = CampaignInputs(impressions=args.impressions, pctr=args.pctr, pcvr=args.pcvr)
    points = curve_points(landscape, inputs, bid_grid(args.from_, args.to, args.step))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bid", "winrate", "cost", "clicks", "conversions", "spend", "cpa"])
    for p in points:
        writer.writerow(
            [
                repr(p["bid"]),
                repr(p["winrate"]),
                "" if p["cost"] is None else repr(p["cost"]),
                repr(p["clicks"]),
                repr(p["conversions"]),
                "" if p["spend"] is None else repr(p["spend"]),
                "" if p["cpa"] is None else repr(p["cpa"]),
            ]
        )
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_recommend(args: argparse.Namespace) -> int:
    landscape = _store(args).load(args.group)
    inputs = CampaignInputs(impressions=args.impressions, pctr=args.pctr, pcvr=args.pcvr)
    goal = CpaGoal(target_cpa=args.cpa_goal, budget=args.budget, tolerance=args.tolerance)
    rec = recommend_bid(landscape, inputs, goal)
    print(json.dumps(rec.to_dict(), indent=2))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    market = load_market(_read_text(args.config))
    if args.seed is not None:
        market = type(market)(
            advertisers=market.advertisers,
            slots=market.slots,
            reserve_cpc=market.reserve_cpc,
            seed=args.seed,
        )
    log = generate_log(market, args.auctions)
    text = dumps_log(log, fmt="jsonl")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    from .evalkit import eval_cpa_forecast, load_eval_dataset

    campaigns = load_eval_dataset(_read_text(args.dataset))
    landscapes = None
    predictions = None
    if args.method == "ours":
        store = _store(args)
        landscapes = {g: store.load(g) for g in store.groups()}
    elif args.method == "external":
        if not args.predictions:
            print("--predictions is required with --method external", file=sys.stderr)
            return 1
        predictions = json.loads(_read_text(args.predictions))
    report = eval_cpa_forecast(
        campaigns, args.method, landscapes=landscapes, predictions=predictions
    )
    print(json.dumps(report, indent=2))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    ui_dir = Path(args.ui) if args.ui else None
    app = create_app(_store(args), ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bidscape", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p):
        p.add_argument("--store", default=None, help="model store directory")

    p = sub.add_parser("ingest", parents=[], help="validate a log file and store it")
    p.add_argument("log", help="log file path, or - for stdin")
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--name", default=None, help="stored log name")
    add_store(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build", help="build landscapes from stored or given logs")
    p.add_argument("--input", action="append", default=None, help="log file (repeatable)")
    p.add_argument("--ranges", default=None, help="pre-derived range-observation JSONL")
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--group-by", dest="group_by", default="by_context",
                   choices=[k.value for k in GroupingKey])
    p.add_argument("--bin-size", dest="bin_size", type=float, default=DEFAULT_BIN_SIZE)
    p.add_argument("--max-ecpm", dest="max_ecpm", type=float, default=DEFAULT_MAX_ECPM)
    p.add_argument("--built-at", dest="built_at", type=int, default=None)
    add_store(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("curves", help="planning curves for a group as CSV")
    p.add_argument("--group", required=True)
    p.add_argument("--from", dest="from_", type=float, required=True)
    p.add_argument("--to", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--pctr", type=float, required=True)
    p.add_argument("--pcvr", type=float, required=True)
    p.add_argument("--impressions", type=float, default=1.0)
    p.add_argument("--out", default=None)
    add_store(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("recommend", help="recommend a bid for a CPA goal")
    p.add_argument("--group", required=True)
    p.add_argument("--cpa-goal", dest="cpa_goal", type=float, required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--impressions", type=float, required=True)
    p.add_argument("--pctr", type=float, required=True)
    p.add_argument("--pcvr", type=float, required=True)
    p.add_argument("--tolerance", type=float, default=0.05)
    add_store(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("simulate", help="generate a synthetic auction log")
    p.add_argument("--config", required=True, help="market config JSON")
    p.add_argument("--auctions", type=int, required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", help="score a CPA forecast method on a dataset")
    p.add_argument("--method", required=True, choices=["ours", "nns", "li", "external"])
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", default=None, help="campaign_id -> prediction JSON")
    add_store(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui", default=None, help="static UI directory to mount at /ui")
    add_store(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BidscapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
