"""Numba dispatch switch.

Set ``DDCONTROL_DISABLE_NUMBA=1`` to route every hot kernel through its
pure-numpy implementation. When numba is not importable the numpy path is
used automatically.
"""
import os

_FLAG = "DDCONTROL_DISABLE_NUMBA"

try:
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the dev env
    _numba_njit = None
    HAVE_NUMBA = False


def numba_requested() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and numba_requested()


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return _numba_njit(*args, **kwargs)

    def decorator(func):
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return decorator
