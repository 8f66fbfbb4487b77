"""Backend selection for the hot residual/gradient kernels.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used.  Setting the environment
variable ``SLPINN_BACKEND=numpy`` forces the fallback.
"""
import os

from . import _pykernels

BACKEND = "numpy"
_impl = _pykernels

if os.environ.get("SLPINN_BACKEND", "").lower() != "numpy":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def forward(w1, w2, b, c, px, py, alpha):
    return _impl.forward(w1, w2, b, c, px, py, alpha)


def backward(w1, w2, b, c, px, py, alpha, rbar):
    return _impl.backward(w1, w2, b, c, px, py, alpha, rbar)


def get_backend(name=None):
    """Module implementing the kernels: ``'numpy'``, ``'cython'`` or the active one."""
    if name is None:
        return _impl
    if name == "numpy":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
