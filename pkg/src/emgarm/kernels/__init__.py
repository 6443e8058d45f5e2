"""Kernel backend selection: compiled extension if available, else pure.

Set EMGARM_PURE_KERNELS=1 to force the pure-Python backend. Both
backends are bit-identical; the compiled one is just faster.
"""

from __future__ import annotations

import os

from . import pure

if os.environ.get("EMGARM_PURE_KERNELS") == "1":
    _impl = pure
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pure

BACKEND: str = _impl.BACKEND
synth_channel = _impl.synth_channel
draw_polyline = _impl.draw_polyline
patch_stats = _impl.patch_stats


def available_backends() -> dict[str, object]:
    """Importable backends by name, for parity tests and benchmarks."""
    backends: dict[str, object] = {"pure": pure}
    try:
        from . import _native
        backends["native"] = _native
    except ImportError:
        pass
    return backends
