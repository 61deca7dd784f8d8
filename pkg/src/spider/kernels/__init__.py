"""Hot numeric kernels with two interchangeable backends.

The numba backend JIT-compiles explicit loops; the numpy backend uses
vectorized equivalents. The convolution kernels accumulate in the same
(channel, ky, kx) order on both backends and are bitwise-identical; the
sampling kernels agree to accumulation-order rounding. Selection happens
once at import: set ``SPIDER_NUMBA=0`` to force the numpy path; otherwise
numba is used when importable.
"""

import os

_flag = os.environ.get("SPIDER_NUMBA", "").strip().lower()
if _flag in ("0", "false", "off", "no"):
    _backend = "numpy"
else:
    try:
        from . import numba_impl as _impl  # noqa: F401

        _backend = "numba"
    except ImportError:
        _backend = "numpy"

if _backend == "numpy":
    from . import numpy_impl as _impl  # noqa: F401

conv2d_fwd = _impl.conv2d_fwd
conv2d_bwd_input = _impl.conv2d_bwd_input
conv2d_bwd_kernel = _impl.conv2d_bwd_kernel
bilinear_gather = _impl.bilinear_gather
bilinear_gather_bwd = _impl.bilinear_gather_bwd
corr_volume_fwd = _impl.corr_volume_fwd
corr_volume_bwd = _impl.corr_volume_bwd

KERNEL_NAMES = (
    "conv2d_fwd",
    "conv2d_bwd_input",
    "conv2d_bwd_kernel",
    "bilinear_gather",
    "bilinear_gather_bwd",
    "corr_volume_fwd",
    "corr_volume_bwd",
)


def backend_name() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return _backend
