"""Numeric kernel backend selection.

The compiled Cython extension is preferred when it imports; otherwise the
pure-Python twin takes over. Set ``COREFTK_PURE_PYTHON=1`` to force the
pure backend (used by the benchmark and the backend-equivalence tests).
"""

import os

from . import pure

_impl = pure
_backend = "pure"

if not os.environ.get("COREFTK_PURE_PYTHON"):
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        _backend = "cython"
    except ImportError:
        pass

LINKAGE_AVERAGE = pure.LINKAGE_AVERAGE
LINKAGE_MAX = pure.LINKAGE_MAX

assignment_max = _impl.assignment_max
mtld_factor_count = _impl.mtld_factor_count
union_find_components = _impl.union_find_components
agglomerate = _impl.agglomerate


def backend_name() -> str:
    """Name of the active backend: "cython" or "pure"."""
    return _backend
