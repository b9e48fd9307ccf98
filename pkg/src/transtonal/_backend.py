"""Select the compiled kernels when available, else the numpy versions.

Set ``TRANSTONAL_BACKEND=python`` to force the numpy kernels.
"""
import os

from . import _pykernels

if os.environ.get("TRANSTONAL_BACKEND", "").lower() == "python":
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _pykernels

NAME = "cython" if kernels is not _pykernels else "python"
