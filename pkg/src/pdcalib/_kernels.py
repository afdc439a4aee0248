"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-numpy
implementation when the extension is not built. Set ``PDCALIB_KERNELS=python``
to force the fallback (used by tests and the benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("PDCALIB_KERNELS", "").lower() == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

deposit_rectangular = _impl.deposit_rectangular
deposit_gaussian = _impl.deposit_gaussian
deposit_exponential = _impl.deposit_exponential
lag_sums = _impl.lag_sums
