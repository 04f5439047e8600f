"""Optional numba acceleration.

Hot kernels are decorated with :func:`jit`.  When numba is importable and the
environment variable ``SPIKED_RMT_DISABLE_NUMBA`` is unset (or ``0``), the
decorator compiles with ``numba.njit``; otherwise the plain Python/numpy
function is returned unchanged.  Both paths run the same source, so results
agree to rounding.
"""

import os

_flag = os.environ.get("SPIKED_RMT_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None


def jit(*args, **kwargs):
    """Decorate with ``numba.njit(cache=True)`` when enabled, else no-op."""
    if args and callable(args[0]) and len(args) == 1 and not kwargs:
        return _wrap(args[0], {})

    def deco(func):
        return _wrap(func, kwargs)

    return deco


def _wrap(func, options):
    if _numba is None:
        return func
    opts = {"cache": True}
    opts.update(options)
    return _numba.njit(**opts)(func)


def python_version(func):
    """Return the uncompiled Python function behind a kernel."""
    return getattr(func, "py_func", func)
