"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``HAARINT_DISABLE_NUMBA`` is set to a truthy value (``1``, ``true``,
``yes``). The choice is made once, at import time; ``BACKEND`` records it.

Both implementations stay importable as ``haarint.kernels.numpy_impl`` and
``haarint.kernels.numba_impl`` (the latter is ``None`` without numba) so that
tests and benchmarks can compare them directly.
"""

import os

from . import _numpy as numpy_impl

try:
    from . import _numba as numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

_disabled = os.environ.get("HAARINT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

if numba_impl is not None and not _disabled:
    _impl = numba_impl
    BACKEND = "numba"
else:
    _impl = numpy_impl
    BACKEND = "numpy"

orthonormal_frames = _impl.orthonormal_frames
logdet_one_minus_gram = _impl.logdet_one_minus_gram
t_functional = _impl.t_functional
permanent = _impl.permanent
q2_inner = _impl.q2_inner

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "orthonormal_frames",
    "logdet_one_minus_gram",
    "t_functional",
    "permanent",
    "q2_inner",
]
