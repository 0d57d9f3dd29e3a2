"""Hot loops of the distillation dynamics.

Two interchangeable implementations exist: numba-compiled loops (default) and
a vectorized numpy path.  Set ``MSD_DISABLE_NUMBA=1`` to force numpy, e.g. on
platforms without numba or to cross-check results.
"""
import os

from . import _numpy
from ._common import CONVERGED, DEAD, DEAD_PROBABILITY, MAX_ITERS, OCTAHEDRON, STATUS_NAMES

_impl = _numpy
BACKEND = "numpy"
if os.environ.get("MSD_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import _numba

        _impl = _numba
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is optional
        pass

map_point = _impl.map_point
iterate_batch = _impl.iterate_batch

__all__ = [
    "BACKEND", "CONVERGED", "DEAD", "DEAD_PROBABILITY", "MAX_ITERS", "OCTAHEDRON", "STATUS_NAMES",
    "iterate_batch", "map_point",
]
