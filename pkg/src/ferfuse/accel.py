"""Numba dispatch for the hot kernels.

Every hot loop in :mod:`ferfuse.kernels` exists twice: a plain numpy
implementation (suffix ``_np``) and a numba ``@njit`` version (suffix
``_nb``).  The exported name binds to the numba build when it is usable and
to the numpy fallback otherwise.  Set ``FERFUSE_NUMBA=0`` to force the
numpy path, e.g. to debug a kernel or to benchmark both sides.
"""

import os

_FLAG = os.environ.get("FERFUSE_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("0", "false", "off", "no")

try:
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and NUMBA_REQUESTED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Kernels compiled with this are only selected at import time when
    ``USE_NUMBA`` is true, but they stay importable either way so the
    benchmark can time both paths in one process.
    """
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba_njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def wrap(fn):
        return fn

    return wrap


def pick(nb_version, np_version):
    """Select the active implementation for a kernel pair."""
    return nb_version if USE_NUMBA else np_version
