"""Backend selection for the numeric inner loops.

The compiled extension is preferred; setting ``MODEDA_PURE_PYTHON=1`` or a
missing build falls back to :mod:`modeda._pykernels`.
"""

import os

from modeda import _pykernels as python_kernels

try:
    from modeda import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("MODEDA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _impl = compiled_kernels
    BACKEND = "cython"
else:
    _impl = python_kernels
    BACKEND = "python"

cooccurrence = _impl.cooccurrence
glove_epoch = _impl.glove_epoch
topk_scan = _impl.topk_scan
softmax_sgd_epoch = _impl.softmax_sgd_epoch
softmax_objective = _impl.softmax_objective

__all__ = ["BACKEND", "cooccurrence", "glove_epoch", "topk_scan", "softmax_sgd_epoch", "softmax_objective",
           "python_kernels", "compiled_kernels"]
