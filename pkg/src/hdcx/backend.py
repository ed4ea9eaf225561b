"""Kernel backend selection.

The compiled Cython extension is preferred when importable; otherwise the
numpy implementation is used. Both produce bit-identical results, so the
choice only affects speed. Set HDCX_BACKEND=numpy or HDCX_BACKEND=cython
to force one (forcing cython fails loudly if the extension is missing).
"""

import os
import sys

from . import _kernels_np

if sys.byteorder != "little":
    raise ImportError("hdcx packs bits via little-endian word views; big-endian hosts are unsupported")

_forced = os.environ.get("HDCX_BACKEND", "").strip().lower()

if _forced == "numpy":
    _impl = _kernels_np
    BACKEND = "numpy"
elif _forced == "cython":
    from . import _kernels_cy as _impl  # raises ImportError if not built

    BACKEND = "cython"
elif _forced:
    raise ImportError(f"unknown HDCX_BACKEND value: {_forced!r} (expected 'numpy' or 'cython')")
else:
    try:
        from . import _kernels_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_np
        BACKEND = "numpy"

hamming_words = _impl.hamming_words
hamming_matrix = _impl.hamming_matrix
bitsum_columns = _impl.bitsum_columns
add_bipolar = _impl.add_bipolar
majority_pack = _impl.majority_pack
