"""Pick the compiled kernels when available, else the numpy fallback."""
import os

from . import _kernels_py

NAME = "python"
kernels = _kernels_py

if os.environ.get("BROADCLASS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
        NAME = "cython"
    except ImportError:
        pass

STATUS_OK = _kernels_py.STATUS_OK
STATUS_FEW_CROSSINGS = _kernels_py.STATUS_FEW_CROSSINGS
STATUS_NO_EXTREMA = _kernels_py.STATUS_NO_EXTREMA
