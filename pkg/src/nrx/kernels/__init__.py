"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The active backend is chosen once at import time from the ``NRX_BACKEND``
environment variable (``numba`` or ``numpy``). The default is numba when it
imports cleanly, numpy otherwise. Both backends implement the same canonical
accumulation order for the convolution so results match the brute-force
oracle exactly; see ``nrx.benchmark`` for a side-by-side comparison.
"""

import os

from . import numpy_backend

_requested = os.environ.get("NRX_BACKEND", "").strip().lower()
if _requested not in ("", "numpy", "numba"):
    raise ValueError(
        f"NRX_BACKEND must be 'numpy' or 'numba', got {_requested!r}"
    )

if _requested == "numpy":
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _impl = numpy_backend
        BACKEND = "numpy"


def available_backends():
    """Names of backends importable in this environment."""
    names = ["numpy"]
    try:
        from . import numba_backend  # noqa: F401

        names.append("numba")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the backend module for ``name`` regardless of the active one."""
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend

        return numba_backend
    raise ValueError(f"unknown kernel backend {name!r}")


conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
segment_pool_forward = _impl.segment_pool_forward
segment_pool_backward = _impl.segment_pool_backward
lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward
