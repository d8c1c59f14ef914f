"""Kernel backend selection.

The compiled extension is preferred when importable; set MWS_PURE_PYTHON=1 to
force the pure-Python mirror (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("MWS_PURE_PYTHON", "").strip() not in ("", "0"):
    from mws._kernels import _pure as _impl
else:
    try:
        from mws._kernels import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from mws._kernels import _pure as _impl

BACKEND: str = _impl.BACKEND
secular_sum = _impl.secular_sum
secular_residual = _impl.secular_residual
solve_secular = _impl.solve_secular


def load_backend(name: str):
    """Explicitly load one backend module ("pure" or "compiled")."""
    if name == "pure":
        from mws._kernels import _pure
        return _pure
    if name == "compiled":
        from mws._kernels import _core  # type: ignore[attr-defined]
        return _core
    raise ValueError(f"unknown kernel backend {name!r}")
