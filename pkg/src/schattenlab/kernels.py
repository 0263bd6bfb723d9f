"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled module is used when it imports cleanly, unless the environment
variable ``SCHATTENLAB_PURE_PYTHON`` is set to a non-empty value other than
``0``.  ``BACKEND`` names the active implementation.
"""

import os

from . import _pykernels


def _load_compiled():
    if os.environ.get("SCHATTENLAB_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()
_active = _compiled if _compiled is not None else _pykernels

BACKEND = "compiled" if _compiled is not None else "python"

lattice_norm_counts = _active.lattice_norm_counts
legendre_table = _active.legendre_table


def available_backends():
    """Mapping of backend name to module, for tests and benchmarks."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["compiled"] = _compiled
    else:
        try:
            from . import _ckernels
        except ImportError:
            pass
        else:
            out["compiled"] = _ckernels
    return out
