"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``FRAMELAB_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used. ``BACKEND`` names the choice.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("FRAMELAB_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

jacobi_eigh = _impl.jacobi_eigh
gram_deviation = _impl.gram_deviation
hermitian_gram_deviation = _impl.hermitian_gram_deviation

__all__ = ["BACKEND", "jacobi_eigh", "gram_deviation", "hermitian_gram_deviation"]
