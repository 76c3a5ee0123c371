"""Kernel selection: compiled extension if available, numpy fallback otherwise.

Set MLEACH_SIM_PURE=1 to force the fallback (used by the benchmark and the
cross-implementation equivalence tests). Either way the public names and
results are identical; only speed differs.
"""

from __future__ import annotations

import os

from . import _kernels_py

IMPLEMENTATION = "python"

if os.environ.get("MLEACH_SIM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _speedups  # type: ignore[attr-defined]

        IMPLEMENTATION = "compiled"
    except ImportError:
        _speedups = None
else:
    _speedups = None

_impl = _speedups if IMPLEMENTATION == "compiled" else _kernels_py

NO_ROUTE = _kernels_py.NO_ROUTE
pairwise_distances = _impl.pairwise_distances
charge_uniform = _impl.charge_uniform
dsdv_merge = _impl.dsdv_merge
