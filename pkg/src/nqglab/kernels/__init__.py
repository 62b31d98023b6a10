"""Backend selection for the hot deformation kernels.

The environment variable NQG_KERNELS picks the implementation:

* ``numba`` - jit-compiled loops (the default when numba imports),
* ``numpy`` - pure-numpy vectorized fallback,
* ``auto``  - numba if available, numpy otherwise.

Both backends implement identical contracts (see _numpy for the reference
semantics); `benchmarks/bench_kernels.py` times them against each other.
"""

from __future__ import annotations

import os

from . import _numpy

_choice = os.environ.get("NQG_KERNELS", "auto").strip().lower()

if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"NQG_KERNELS must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    _impl = _numpy
else:
    try:
        from . import _numba as _impl  # noqa: F401
    except ImportError:
        if _choice == "numba":
            raise
        _impl = _numpy

backend_name = "numpy" if _impl is _numpy else "numba"

bump_profile = _impl.bump_profile
bump_grad_coeff = _impl.bump_grad_coeff
det_jacobian = _impl.det_jacobian
invert_displacement = _impl.invert_displacement
interp_periodic = _impl.interp_periodic
