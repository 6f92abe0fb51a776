"""Backend selection for the hot kernels.

The numba backend is used when available; set MSSIM_PURE_NUMPY=1 to force the
pure-numpy fallback (useful on platforms without numba wheels, and for the
benchmark in benchmarks/bench_kernels.py).
"""

import os

from ._kernels_numpy import branch_signs, ms_factor_ensemble as _ensemble_numpy

try:
    from ._kernels_numba import ms_factor_ensemble as _ensemble_numba
    HAS_NUMBA = True
except ImportError:
    _ensemble_numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("MSSIM_PURE_NUMPY", "0") != "1"

ms_factor_ensemble = _ensemble_numba if USE_NUMBA else _ensemble_numpy

__all__ = ["branch_signs", "ms_factor_ensemble", "HAS_NUMBA", "USE_NUMBA"]
