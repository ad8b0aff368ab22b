"""Optional numba acceleration.

Kernels are written as plain Python over scalars and numpy arrays and
decorated with :func:`njit`.  When numba is importable and the environment
variable ``SCREWON_NO_JIT`` is unset (or ``0``), they are compiled in
nopython mode; otherwise the decorator returns the function unchanged and
the same source runs under CPython.  Compiled kernels keep the original
Python function on ``.py_func`` either way, which the tests and the
benchmark use to compare both paths.
"""

import os

_flag = os.environ.get("SCREWON_NO_JIT", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

JIT_ENABLED = _numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` with cache and nogil on, or a pass-through."""
    if _numba is None:
        def wrap(fn):
            fn.py_func = fn
            return fn
    else:
        opts = {"cache": True, "nogil": True}
        opts.update(kwargs)

        def wrap(fn):
            return _numba.njit(**opts)(fn)

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return wrap(args[0])
    return wrap
