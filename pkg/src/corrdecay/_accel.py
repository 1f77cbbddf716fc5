"""Optional numba acceleration.

Hot kernels are written once as plain Python over numpy arrays and wrapped
with :func:`njit`.  Setting ``CORRDECAY_DISABLE_NUMBA=1`` (or running without
numba installed) leaves them as ordinary Python functions, which is the
reference path the benchmark compares against.
"""

import os

_DISABLED = os.environ.get("CORRDECAY_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    import numba

    NUMBA_ENABLED = True
except ImportError:
    numba = None
    NUMBA_ENABLED = False


def njit(*args, **kws):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    if NUMBA_ENABLED:
        kws.setdefault("cache", True)
        return numba.njit(*args, **kws)
    if len(args) == 1 and callable(args[0]) and not kws:
        return args[0]
    return lambda fn: fn
