"""Hot per-pixel kernels with a compiled core and a numpy fallback.

The compiled extension (``_native``, Cython) is preferred when it built
successfully; otherwise the vectorized numpy implementation is used. Set
``PERIOCULAR_KERNELS=python`` or ``=native`` to force a backend.
"""

import os

_requested = os.environ.get("PERIOCULAR_KERNELS", "auto")

if _requested == "python":
    from . import py_backend as _impl
    BACKEND = "python"
elif _requested == "native":
    from . import _native as _impl  # noqa: F401
    BACKEND = "native"
else:
    try:
        from . import _native as _impl
        BACKEND = "native"
    except ImportError:
        from . import py_backend as _impl
        BACKEND = "python"

lbp_codes = _impl.lbp_codes
glcm_counts = _impl.glcm_counts
svm_cd_epoch = _impl.svm_cd_epoch

__all__ = ["BACKEND", "lbp_codes", "glcm_counts", "svm_cd_epoch"]
