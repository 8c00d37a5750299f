"""Hot-kernel backend selection: compiled extension when built, numpy otherwise."""

try:
    from . import ckernels as _impl
    BACKEND = "cython"
except ImportError:  # extension not built on this install
    from . import pykernels as _impl
    BACKEND = "python"

from . import pykernels

mark_composites = _impl.mark_composites
max_drop = _impl.max_drop

__all__ = ["BACKEND", "mark_composites", "max_drop", "pykernels"]
