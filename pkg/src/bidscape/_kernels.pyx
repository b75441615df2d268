# cython: boundscheck=False, wraparound=False, cdivision=False
"""Compiled range-derivation kernel.

Expression-for-expression identical to _kernels_py.derive_ranges_batch so the
two implementations produce bit-identical output (IEEE double arithmetic in
the same evaluation order). cdivision stays off only for Python-compatible
zero-division semantics; scores are validated positive upstream.
"""

import numpy as np


def derive_ranges_batch(double[::1] scores, double[::1] bids, double[::1] pctrs,
                        double[::1] costs, long long[::1] starts, double max_ecpm):
    """See _kernels_py.derive_ranges_batch for the contract."""
    cdef Py_ssize_t n_snaps = starts.shape[0] - 1
    cdef Py_ssize_t cap = 0
    cdef Py_ssize_t s, lo, hi, n, a, b, fa, fb, k
    for s in range(n_snaps):
        n = starts[s + 1] - starts[s]
        cap += n * n

    src_np = np.empty(cap, dtype=np.int64)
    pos_np = np.empty(cap, dtype=np.int64)
    up_np = np.empty(cap, dtype=np.float64)
    dn_np = np.empty(cap, dtype=np.float64)
    cost_np = np.empty(cap, dtype=np.float64)
    cdef long long[::1] src = src_np
    cdef long long[::1] pos = pos_np
    cdef double[::1] up_v = up_np
    cdef double[::1] dn_v = dn_np
    cdef double[::1] cost_v = cost_np

    cdef double sa, bp, ec, up, dn
    k = 0
    for s in range(n_snaps):
        lo = starts[s]
        hi = starts[s + 1]
        n = hi - lo
        for a in range(n):
            fa = lo + a
            sa = scores[fa]
            bp = bids[fa] * pctrs[fa]
            ec = costs[fa] * pctrs[fa]
            for b in range(n):
                fb = lo + b
                if b <= a:
                    up = max_ecpm if b == 0 else scores[fb - 1] / sa * bp
                else:
                    up = scores[fb] / sa * bp
                if b < a:
                    dn = scores[fb] / sa * bp
                elif b == n - 1:
                    dn = bp
                else:
                    dn = scores[fb + 1] / sa * bp
                if up >= dn and ec <= up * (1.0 + 1e-9):
                    src[k] = fa
                    pos[k] = b + 1
                    up_v[k] = up
                    dn_v[k] = dn
                    cost_v[k] = ec
                    k += 1
    return (src_np[:k].copy(), pos_np[:k].copy(), up_np[:k].copy(),
            dn_np[:k].copy(), cost_np[:k].copy())
