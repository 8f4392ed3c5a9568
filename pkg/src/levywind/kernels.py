"""Backend selection for the hot kernels.

The compiled ``_core`` extension is used when it imports; otherwise the numpy
implementations in ``_pure`` take over. Set ``LEVYWIND_PURE=1`` to force the
fallback.
"""

import os

from . import _pure

if os.environ.get("LEVYWIND_PURE", "") not in ("", "0"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

flow = _impl.flow
riccati_events = _impl.riccati_events
exp_functional_events = _impl.exp_functional_events
riccati_heun = _impl.riccati_heun
exp_functional_grid = _impl.exp_functional_grid
winding_walk = _impl.winding_walk
winding_raster = _impl.winding_raster
boundary_mask = _impl.boundary_mask
winding_points = _impl.winding_points


def available_backends():
    """Map of backend name to module for every backend that imports."""
    out = {"pure": _pure}
    try:
        from . import _core

        out["compiled"] = _core
    except ImportError:
        pass
    return out
