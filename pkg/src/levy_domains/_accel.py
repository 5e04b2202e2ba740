"""Select compiled kernels when built, numpy fallbacks otherwise.

Set LEVY_DOMAINS_PURE=1 to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
stream_block_sums = _fallback.stream_block_sums
accumulate_paths = _fallback.accumulate_paths

if not os.environ.get("LEVY_DOMAINS_PURE"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        stream_block_sums = _kernels.stream_block_sums
        accumulate_paths = _kernels.accumulate_paths
