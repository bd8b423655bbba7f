"""Selection between the compiled stepping core and the NumPy fallback.

The compiled extension is optional: if it failed to build, or KSWAVE_NO_EXT=1
is set (at build or import time), the pure-Python implementation is used
transparently.  `active_backend()` reports which one is in effect.
"""

from __future__ import annotations

import os

from . import _core_py

try:
    if os.environ.get("KSWAVE_NO_EXT", "") == "1":
        raise ImportError("disabled by KSWAVE_NO_EXT=1")
    from . import _core  # type: ignore[attr-defined]

    _impl = _core
except ImportError:  # pragma: no cover - depends on build environment
    _core = None
    _impl = _core_py


def active_backend() -> str:
    return _impl.BACKEND_NAME


def available_backends() -> dict:
    """Name -> module for every importable stepping core."""
    out = {"python": _core_py}
    if _core is not None:
        out["compiled"] = _core
    return out


def advance(u, v, nsteps, dx, dt, chi, d, react=True, advect=True):
    return _impl.advance(u, v, nsteps, dx, dt, chi, d, react, advect)
