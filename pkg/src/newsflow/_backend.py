"""Select the compiled pair-scoring kernel, falling back to numpy.

Set ``NEWSFLOW_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pairwise_py

if os.environ.get("NEWSFLOW_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _pairwise as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    score_rows = _compiled.score_rows
    BACKEND = "compiled"
else:
    score_rows = _pairwise_py.score_rows
    BACKEND = "python"

KERNELS = {"python": _pairwise_py.score_rows}
if _compiled is not None:
    KERNELS["compiled"] = _compiled.score_rows
