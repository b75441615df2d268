"""Pure-Python twin of the compiled range-derivation kernel.

Must stay expression-for-expression identical to _kernels.pyx: both evaluate
score ratios as (score_other / score_own) * bid_ecpm so results are
bit-identical regardless of which implementation is selected.
"""

from __future__ import annotations

import numpy as np

# Tuples whose eCPM cost exceeds the upper bound by more than this relative
# slack are dropped; equality cases produced by second-price arithmetic land
# within one ulp and must survive.
REL_COST_SLACK = 1e-9


def derive_ranges_batch(scores, bids, pctrs, costs, starts, max_ecpm):
    """Candidate eCPM bid ranges for every (participant, position) pair.

    Inputs are flat float64 arrays over all participants of all snapshots,
    position-ordered within each snapshot; starts[s]:starts[s+1] delimits
    snapshot s. bids and costs are in currency units (not micros).

    Returns (src, pos, up, dn, cost) where src is the flat index of the
    observing participant, pos the 1-based candidate position, and up/dn/cost
    the eCPM range bounds and eCPM cost. Pairs failing up >= dn or the cost
    slack are omitted.
    """
    src_out: list[int] = []
    pos_out: list[int] = []
    up_out: list[float] = []
    dn_out: list[float] = []
    cost_out: list[float] = []
    n_snaps = len(starts) - 1
    for s in range(n_snaps):
        lo = int(starts[s])
        hi = int(starts[s + 1])
        n = hi - lo
        for a in range(n):
            fa = lo + a
            sa = float(scores[fa])
            bp = float(bids[fa]) * float(pctrs[fa])
            ec = float(costs[fa]) * float(pctrs[fa])
            for b in range(n):
                fb = lo + b
                if b <= a:
                    up = max_ecpm if b == 0 else float(scores[fb - 1]) / sa * bp
                else:
                    up = float(scores[fb]) / sa * bp
                if b < a:
                    dn = float(scores[fb]) / sa * bp
                elif b == n - 1:
                    dn = bp
                else:
                    dn = float(scores[fb + 1]) / sa * bp
                if up >= dn and ec <= up * (1.0 + REL_COST_SLACK):
                    src_out.append(fa)
                    pos_out.append(b + 1)
                    up_out.append(up)
                    dn_out.append(dn)
                    cost_out.append(ec)
    return (
        np.asarray(src_out, dtype=np.int64),
        np.asarray(pos_out, dtype=np.int64),
        np.asarray(up_out, dtype=np.float64),
        np.asarray(dn_out, dtype=np.float64),
        np.asarray(cost_out, dtype=np.float64),
    )
