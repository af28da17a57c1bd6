"""Monodromy propagation kernel with compiled and pure-Python backends.

The compiled Cython core is preferred when it was built; otherwise the
pure-Python implementation of the same algorithm takes over.  Set the
environment variable ``KGHOPF_FORCE_FALLBACK=1`` to force the Python path
(used by the parity tests and the benchmark).
"""

import os

from . import pyfallback

if os.environ.get("KGHOPF_FORCE_FALLBACK") == "1":
    _impl = pyfallback
    BACKEND = "python"
else:
    try:
        from . import _hillcore as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = pyfallback
        BACKEND = "python"

propagate_batch = _impl.propagate_batch

__all__ = ["propagate_batch", "BACKEND", "pyfallback"]
