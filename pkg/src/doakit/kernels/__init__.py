"""Scan kernels with a compiled core and a numpy fallback.

Selection is per kernel, because the two have opposite performance shapes
(measured in benchmarks/kernel_bench.py):

* ``batch_objective`` grinds through huge batches of tiny Cholesky solves,
  where hand-rolled compiled loops beat vectorized numpy by ~3x; it binds to
  the compiled core when the extension built.
* ``scan_objective`` is one large matrix product per call, which BLAS
  already does faster than a plain compiled loop; it binds to the numpy
  implementation by default.

Set DOAKIT_BACKEND to "numpy" or "cython" to force both kernels onto one
side (forcing "cython" without the built extension raises at import).
``BATCH_BACKEND`` and ``SCAN_BACKEND`` name what is active; ``BACKEND`` is
"cython" when the compiled core is in use for its kernel.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:
    _core = None

_requested = os.environ.get("DOAKIT_BACKEND", "").strip().lower()

if _requested == "numpy":
    _batch_impl, _scan_impl = _fallback, _fallback
elif _requested == "cython":
    if _core is None:
        raise ImportError("DOAKIT_BACKEND=cython but the compiled extension "
                          "is not built")
    _batch_impl, _scan_impl = _core, _core
elif _requested:
    raise ImportError(f"unknown DOAKIT_BACKEND value: {_requested!r}")
else:
    _batch_impl = _core if _core is not None else _fallback
    _scan_impl = _fallback

BATCH_BACKEND = "cython" if _batch_impl is _core else "numpy"
SCAN_BACKEND = "cython" if _scan_impl is _core else "numpy"
BACKEND = "cython" if "cython" in (BATCH_BACKEND, SCAN_BACKEND) else "numpy"

batch_objective = _batch_impl.batch_objective
scan_objective = _scan_impl.scan_objective

__all__ = ["BACKEND", "BATCH_BACKEND", "SCAN_BACKEND",
           "batch_objective", "scan_objective"]
