"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded. Set ``QDCAVITY_PURE_PYTHON=1`` to force the fallback.
"""

import os

from qdcavity import _pykernels

python_backend = _pykernels

if os.environ.get("QDCAVITY_PURE_PYTHON", "") not in ("", "0"):
    backend = _pykernels
    BACKEND = "python"
else:
    try:
        from qdcavity import _kernels as backend
        BACKEND = "cython"
    except ImportError:
        backend = _pykernels
        BACKEND = "python"

apply_1q = backend.apply_1q
apply_2q = backend.apply_2q
marginal_probs = backend.marginal_probs
collapse = backend.collapse
