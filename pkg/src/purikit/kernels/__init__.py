"""Hot numeric kernels with switchable backends.

Two implementations live side by side: numba-compiled loops (default when
numba imports cleanly) and a pure-numpy fallback.  Selection is controlled
by the PURIKIT_KERNELS environment variable:

    PURIKIT_KERNELS=auto    numba if available, else numpy (default)
    PURIKIT_KERNELS=numba   require numba, fail otherwise
    PURIKIT_KERNELS=numpy   force the vectorized/pure-Python fallback

``use_backend`` swaps the active backend at runtime (used by the parity
tests and by benchmarks/bench_kernels.py).
"""

import logging
import os

_log = logging.getLogger(__name__)

_BACKENDS = ("numba", "numpy")


def _load(name):
    if name == "numpy":
        from . import numpy_backend
        return numpy_backend
    if name == "numba":
        from . import numba_backend
        return numba_backend
    raise ValueError(f"unknown kernel backend {name!r} (choose from {_BACKENDS})")


def _select_default():
    choice = os.environ.get("PURIKIT_KERNELS", "auto").lower()
    if choice == "auto":
        try:
            return _load("numba")
        except ImportError:
            _log.warning("numba unavailable; falling back to numpy kernels")
            return _load("numpy")
    return _load(choice)


_active = _select_default()


def backend_name():
    return _active.NAME


def use_backend(name):
    """Switch the active kernel backend ('numba' or 'numpy')."""
    global _active
    _active = _load(name)


def get_backend(name):
    """Return a backend module without activating it."""
    return _load(name)


def gather_rows(plane, idx, w):
    return _active.gather_rows(plane, idx, w)


def fdct8x8(blocks):
    return _active.fdct8x8(blocks)


def idct8x8_islow(deq):
    return _active.idct8x8_islow(deq)


def encode_scan(*args):
    return _active.encode_scan(*args)


def decode_scan(*args):
    return _active.decode_scan(*args)


# status codes shared by both scan codec implementations
from .scan_codec import SCAN_OK, SCAN_TRUNCATED, SCAN_BAD_CODE, SCAN_BAD_MARKER  # noqa: E402,F401
