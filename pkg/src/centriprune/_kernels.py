"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the numpy
fallback is always available. ``CENTRIPRUNE_BACKEND=py`` or ``=cy`` forces
a choice (``cy`` raises if the extension is missing). Pivot seeding stays
numpy-only in both backends: its row reductions are already vectorized and
a second implementation would just risk summation-order drift.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None


@dataclass(frozen=True)
class Backend:
    name: str
    greedy_loop: Callable
    maxmin_pivots: Callable


_PY = Backend("py", _kernels_py.greedy_loop, _kernels_py.maxmin_pivots)
_CY = None
if _kernels_cy is not None:
    _CY = Backend("cy", _kernels_cy.greedy_loop, _kernels_py.maxmin_pivots)


def available_backends() -> dict:
    out = {"py": _PY}
    if _CY is not None:
        out["cy"] = _CY
    return out


def get_backend(name: str = "auto") -> Backend:
    if name in ("auto", "", None):
        return _CY if _CY is not None else _PY
    if name == "py":
        return _PY
    if name == "cy":
        if _CY is None:
            raise RuntimeError("compiled kernel backend requested but not built")
        return _CY
    raise ValueError(f"unknown backend {name!r} (expected auto, py, or cy)")


ACTIVE = get_backend(os.environ.get("CENTRIPRUNE_BACKEND", "auto").lower())
