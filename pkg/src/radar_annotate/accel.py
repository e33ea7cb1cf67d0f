"""Numba backend selection.

The hot kernels in :mod:`radar_annotate.kernels` exist twice: a numba
``@njit`` version and a vectorized pure-numpy version. Which one runs is
decided once, at import time:

* ``RADAR_ANNOTATE_NUMBA=0`` (or ``false``/``no``) forces the numpy path;
* otherwise numba is used when it imports cleanly.

Both implementations stay importable regardless of the flag so tests and
the benchmark can compare them in a single process.
"""

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """Decorator stub: returns the function unchanged."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def _flag_enabled(value: str) -> bool:
    return value.strip().lower() not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _flag_enabled(os.environ.get("RADAR_ANNOTATE_NUMBA", "1"))


def backend_name() -> str:
    """Active backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
