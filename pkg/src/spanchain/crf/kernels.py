"""Kernel backend selection.

The compiled extension is preferred when importable; set
``SPANCHAIN_KERNELS=python`` to force the NumPy fallback (any other value,
or an unbuilt extension, falls back silently).
"""

from __future__ import annotations

import os

from . import _pykernels

_impl = _pykernels
_backend = "python"

if os.environ.get("SPANCHAIN_KERNELS", "").lower() not in ("python", "py", "numpy"):
    try:
        from . import _ckernels as _cimpl
    except ImportError:
        pass
    else:
        _impl = _cimpl
        _backend = "cython"


def backend() -> str:
    """Name of the active kernel backend: 'cython' or 'python'."""
    return _backend


def logz(scores, trans, start, end):
    return _impl.logz(scores, trans, start, end)


def posteriors(scores, trans, start, end):
    return _impl.posteriors(scores, trans, start, end)


def viterbi(scores, trans, start, end, allowed, allowed_start, allowed_end):
    return _impl.viterbi(scores, trans, start, end, allowed, allowed_start, allowed_end)
