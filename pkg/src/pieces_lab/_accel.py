"""Optional numba acceleration.

Hot loops live in functions decorated with ``maybe_njit``.  When numba is
importable and the environment variable PIECES_LAB_NO_NUMBA is unset (or "0"),
the decorator compiles them; otherwise they run as plain Python/numpy.  Both
paths compute identical results (see benchmarks/bench_kernels.py).
"""

import os

USE_NUMBA = os.environ.get("PIECES_LAB_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if USE_NUMBA:
    def maybe_njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
else:
    def maybe_njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
