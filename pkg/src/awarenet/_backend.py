"""Kernel backend selection.

The compiled extension is preferred; the numpy implementation is the
fallback.  Force a backend with AWARENET_BACKEND=pure|compiled.
"""

from __future__ import annotations

import os

from . import _purepy

_choice = os.environ.get("AWARENET_BACKEND", "").strip().lower()

if _choice == "pure":
    _impl = _purepy
    BACKEND = "pure"
elif _choice == "compiled":
    from . import _kernels as _impl  # noqa: F401  (raises if not built)

    BACKEND = "compiled"
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _purepy
        BACKEND = "pure"
    else:
        BACKEND = "compiled"

simulate_awareness = _impl.simulate_awareness
project_capped_simplex = _impl.project_capped_simplex
brd_loop = _impl.brd_loop

DERIVATIVE_FLOOR = _purepy.DERIVATIVE_FLOOR
FAMILY_TULLOCK = _purepy.FAMILY_TULLOCK
FAMILY_LOG = _purepy.FAMILY_LOG
FAMILY_EXP = _purepy.FAMILY_EXP
FAMILY_SOFTMAX = _purepy.FAMILY_SOFTMAX
MODE_EUCLIDEAN = _purepy.MODE_EUCLIDEAN
MODE_PAPER_FREEZE = _purepy.MODE_PAPER_FREEZE
