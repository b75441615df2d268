"""Kernel implementation selection.

The compiled extension is preferred when importable; the pure-Python twin is
the fallback. BIDSCAPE_PURE_PYTHON=1 forces the fallback (useful for
benchmarking and debugging). Selection happens once at import.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("BIDSCAPE_PURE_PYTHON") == "1":
    _impl = _kernels_py
    IMPLEMENTATION = "python"
else:
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        _impl = _compiled
        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = _kernels_py
        IMPLEMENTATION = "python"

derive_ranges_batch = _impl.derive_ranges_batch


def available_implementations() -> dict:
    """Importable kernel entry points keyed by name; python is always present."""
    impls = {"python": _kernels_py.derive_ranges_batch}
    try:
        from . import _kernels as compiled  # type: ignore[attr-defined]

        impls["cython"] = compiled.derive_ranges_batch
    except ImportError:
        pass
    return impls
