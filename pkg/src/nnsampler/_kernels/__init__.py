"""Backend selection for the KDE hot kernels.

The compiled Cython extension is used when it is importable; otherwise the
numpy reference implementation takes over.  Set NNSAMPLER_PURE_PYTHON=1 to
force the fallback.  Callers go through the module attributes
(``kernels.kde_values``) so benchmarks can swap implementations at runtime.
"""

import os

from . import _ref

backend = "python"
_impl = _ref

if not os.environ.get("NNSAMPLER_PURE_PYTHON"):
    try:
        from . import _core
    except ImportError:
        pass
    else:
        _impl = _core
        backend = "compiled"

kde_values = _impl.kde_values
kde_sample_grad = _impl.kde_sample_grad
