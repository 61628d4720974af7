"""Kernel backend selection.

The hot loops in :mod:`symmes.kernels` exist twice: a numba ``@njit`` version
and a pure-numpy version.  ``SYMMES_BACKEND`` picks which one the public
dispatchers use:

* ``numba`` (default when numba imports) -- compiled kernels
* ``numpy`` -- vectorised numpy fallback, no compilation step

Both paths agree to rounding error; the test suite checks that.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep in practice
    numba = None
    HAVE_NUMBA = False

_requested = os.environ.get("SYMMES_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"SYMMES_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if args and callable(args[0]):
        return args[0]
    return wrap
