"""Backend selection for the discrete Frechet kernels.

The compiled extension is preferred. Setting the environment variable
``FRECHETDS_PURE=1`` forces the numpy fallback; ``use_backend`` switches at
runtime (used by tests and the benchmark).
"""

import os

from . import _fallback

try:
    from . import _dfd as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

BACKEND = "python" if (_compiled is None or os.environ.get("FRECHETDS_PURE") == "1") else "cython"
_impl = _BACKENDS[BACKEND]


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name):
    """Switch the active kernel implementation; returns the previous name."""
    global BACKEND, _impl
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    prev = BACKEND
    BACKEND, _impl = name, _BACKENDS[name]
    return prev


def dfd(p, q):
    return _impl.dfd(p, q)


def dfd_pairs(A, B):
    return _impl.dfd_pairs(A, B)
