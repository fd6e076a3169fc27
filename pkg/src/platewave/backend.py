"""Backend selection for accelerated kernels.

Hot numeric loops ship in two variants: a numba ``@njit`` compiled version
and a pure-numpy fallback.  Selection happens once at import time from the
environment variable ``PLATEWAVE_NUMBA`` ("0"/"false"/"off" disables the
compiled path).  The numpy fallback is also used automatically when numba
is not importable.
"""

import os

_flag = os.environ.get("PLATEWAVE_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "off", "no")

if _want_numba:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def backend_name() -> str:
    """Name of the active backend, "numba" or "numpy"."""
    return "numba" if NUMBA_ENABLED else "numpy"
