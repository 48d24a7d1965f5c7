"""Kernel selection: compiled extension when importable, else pure Python.

Set ``RUMORSOURCE_PURE=1`` to force the fallback.
"""

import os

from . import _pykernels as pure

compiled = None
if os.environ.get("RUMORSOURCE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

kernels = compiled if compiled is not None else pure
BACKEND = "compiled" if compiled is not None else "python"
