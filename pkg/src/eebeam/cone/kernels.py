"""Kernel backend selection.

The hot per-cone operations of the interior-point solver exist twice: a
compiled Cython extension (`_kernels_cy`) and a pure-numpy fallback
(`_kernels_py`).  The compiled core is preferred when present; set
EEBEAM_KERNELS=py (or =cy) to force a backend.  `benchmarks/` compares the
two.
"""

import os

from ._layout import Layout  # noqa: F401  (re-exported)

_choice = os.environ.get("EEBEAM_KERNELS", "").strip().lower()

if _choice in ("py", "python"):
    from . import _kernels_py as _impl
    BACKEND = "python"
elif _choice in ("cy", "cython", "c"):
    from . import _kernels_cy as _impl  # noqa: F401
    BACKEND = "cython"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

ScalingError = _impl.ScalingError
BIG_STEP = _impl.BIG_STEP

scaling = _impl.scaling
apply_w = _impl.apply_w
apply_w2 = _impl.apply_w2
jmul = _impl.jmul
jsolve = _impl.jsolve
max_step = _impl.max_step
min_margin = _impl.min_margin


def get_backend(name):
    """Explicit backend module lookup (used by the benchmark)."""
    if name == "python":
        from . import _kernels_py
        return _kernels_py
    if name == "cython":
        from . import _kernels_cy
        return _kernels_cy
    raise ValueError(f"unknown backend {name!r}")
