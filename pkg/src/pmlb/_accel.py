"""Optional numba acceleration for the hot kernels.

Every kernel ships twice: an ``@njit`` loop version and a vectorized numpy
version.  The numba path is used when numba imports and the environment
variable ``PMLB_DISABLE_NUMBA`` is unset (or ``0``).
"""

from __future__ import annotations

import contextlib
import logging
import os

logger = logging.getLogger(__name__)

ENV_FLAG = "PMLB_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


_use_numba = HAVE_NUMBA and not _env_disabled()
if HAVE_NUMBA and not _use_numba:
    logger.debug("%s set: using numpy kernels", ENV_FLAG)


def njit(fn=None, **kwargs):
    """``numba.njit`` with caching, or the identity decorator without numba."""
    if not HAVE_NUMBA:
        return fn if fn is not None else (lambda f: f)
    kwargs.setdefault("cache", True)
    if fn is None:
        return numba.njit(**kwargs)
    return numba.njit(**kwargs)(fn)


def use_numba() -> bool:
    return _use_numba


@contextlib.contextmanager
def backend(name: str):
    """Temporarily force ``"numba"`` or ``"numpy"`` kernels."""
    global _use_numba
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    saved = _use_numba
    _use_numba = name == "numba"
    try:
        yield
    finally:
        _use_numba = saved
