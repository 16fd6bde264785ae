"""Pick the compiled tree kernel when it is importable.

Set ``IBTS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _tree_py

_compiled = None
if os.environ.get("IBTS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _tree as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKENDS = {"python": _tree_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

DEFAULT = "compiled" if _compiled is not None else "python"


def get(name=None):
    """Return the kernel module called ``name`` (default: the fastest available)."""
    name = DEFAULT if name is None else name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"tree backend {name!r} is not available; have {sorted(BACKENDS)}") from None
