"""Benchmark the compiled range-derivation kernel against the pure-Python one.

Two views:

1. kernel-only: both implementations on identical flat batch arrays, timed
   over several batch shapes;
2. end-to-end: simulated auction log -> win-range extraction -> landscape
   build, with the kernel swapped between runs.

Usage: python3 benchmarks/bench_kernels.py [--auctions N] [--repeats R]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from bidscape import _native
from bidscape.gsp_sim import MarketConfig, SimAdvertiser, generate_log
from bidscape.landscape import build_landscape, win_range_observations


def make_batch(rng: np.random.Generator, n_auctions: int, per_auction: int):
    """Flat arrays shaped like a real position-ordered auction batch."""
    counts = rng.integers(2, per_auction + 1, size=n_auctions)
    starts = np.zeros(n_auctions + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    total = int(starts[-1])
    scores = np.empty(total, dtype=np.float64)
    for a in range(n_auctions):
        lo, hi = starts[a], starts[a + 1]
        scores[lo:hi] = np.sort(rng.uniform(1e-5, 1e-3, hi - lo))[::-1]
    bids = np.round(rng.uniform(0.01, 5.0, total), 6)
    pctrs = rng.uniform(1e-4, 0.1, total)
    costs = np.round(bids * rng.uniform(0.0, 1.0, total), 6)
    return scores, bids, pctrs, costs, starts, 9.99


def time_call(fn, repeats: int) -> float:
    """Median wall-clock seconds over `repeats` calls."""
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_kernels(repeats: int) -> None:
    impls = _native.available_implementations()
    print(f"implementations: {', '.join(impls)} (active: {_native.IMPLEMENTATION})")
    print()
    print(f"{'batch shape':<28}" + "".join(f"{name + ' (ms)':>16}" for name in impls) + f"{'speedup':>10}")
    rng = np.random.default_rng(42)
    shapes = [(1000, 5), (1000, 12), (200, 40), (5000, 8)]
    for n_auctions, per_auction in shapes:
        batch = make_batch(rng, n_auctions, per_auction)
        medians = {}
        reference = None
        for name, fn in impls.items():
            out = fn(*batch)
            if reference is None:
                reference = out
            else:
                for got, want in zip(out, reference):
                    np.testing.assert_array_equal(got, want)
            medians[name] = time_call(lambda f=fn: f(*batch), repeats)
        label = f"{n_auctions} auctions x <= {per_auction}"
        row = f"{label:<28}" + "".join(f"{medians[n] * 1e3:>16.2f}" for n in impls)
        if len(medians) > 1:
            values = list(medians.values())
            row += f"{max(values) / min(values):>9.1f}x"
        print(row)


def bench_end_to_end(n_auctions: int, repeats: int) -> None:
    market = MarketConfig(
        tuple(
            SimAdvertiser(
                advertiser_id=f"adv{i:02d}",
                context="ctx",
                base_bid=0.3 * (1.5 / 0.3) ** (i / 19),
                bid_jitter=0.4,
                quality=1.0,
                pctr_by_position=(0.05,) * 5,
                participation_rate=0.8,
            )
            for i in range(20)
        ),
        slots=5,
        reserve_cpc=0.05,
        seed=7,
    )
    log = generate_log(market, n_auctions)

    def pipeline():
        obs = win_range_observations(log, slots=market.slots)
        return build_landscape(obs, bin_size=0.001, group="ctx")

    print()
    print(f"end-to-end: {n_auctions} simulated auctions -> ranges -> landscape build")
    active = _native.derive_ranges_batch
    try:
        for name, fn in _native.available_implementations().items():
            _native.derive_ranges_batch = fn
            seconds = time_call(pipeline, repeats)
            print(f"  {name:<8} {seconds * 1e3:10.1f} ms")
    finally:
        _native.derive_ranges_batch = active


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--auctions", type=int, default=5000,
                        help="auction count for the end-to-end run (default 5000)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per measurement (default 5)")
    args = parser.parse_args()
    bench_kernels(args.repeats)
    bench_end_to_end(args.auctions, args.repeats)


if __name__ == "__main__":
    main()
