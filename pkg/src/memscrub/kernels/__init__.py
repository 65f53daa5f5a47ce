"""Kernel backend selection.

The compiled extension is used when it built; otherwise the pure-Python twin
takes over. Both produce bit-identical results (see ``pure.py``), so the
choice only affects speed. ``MEMSCRUB_KERNELS=pure`` or ``=native`` forces a
backend; forcing ``native`` raises if the extension is unavailable.
"""

from __future__ import annotations

import os

from memscrub.kernels import pure as _pure_mod

_forced = os.environ.get("MEMSCRUB_KERNELS", "").strip().lower()
if _forced not in ("", "pure", "native"):
    raise ValueError(f"MEMSCRUB_KERNELS must be 'pure' or 'native', got {_forced!r}")

_native_mod = None
if _forced != "pure":
    try:
        from memscrub.kernels import _native as _native_mod  # type: ignore[no-redef]
    except ImportError:
        if _forced == "native":
            raise
        _native_mod = None

if _native_mod is not None:
    BACKEND = "native"
    _impl = _native_mod
else:
    BACKEND = "pure"
    _impl = _pure_mod

next_u64 = _impl.next_u64
next_double = _impl.next_double
run_walk = _impl.run_walk
lcs_length = _impl.lcs_length


def backends() -> dict[str, object]:
    """Importable backends keyed by name (used by parity tests and benchmarks)."""
    found: dict[str, object] = {"pure": _pure_mod}
    if _native_mod is not None:
        found["native"] = _native_mod
    return found
