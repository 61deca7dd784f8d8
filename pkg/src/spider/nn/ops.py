"""Differentiable array operations with hand-derived backward passes.

Every op is a pure function over float64 numpy arrays. Forward calls return
the output (plus a cache where the backward needs one); the matching *_bwd
function maps output gradients to input gradients. There is no tape: models
compose these explicitly and run the chain in reverse themselves.

Feature maps are [C, H, W]; coordinate maps are index-space unless stated.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .. import kernels
from ..exceptions import NonFiniteInputError, ShapeError

SIGMOID_CLIP = 30.0  # keeps sigmoid output strictly inside (0,1) in float64


def _as64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


# ---------------------------------------------------------------------------
# convolution


def conv2d(x, w, b=None, stride=1, pad=0):
    """Cross-correlate x[C,H,W] with w[O,C,k,k]; output extent must divide exactly."""
    x = _as64(x)
    w = _as64(w)
    if x.ndim != 3 or w.ndim != 4:
        raise ShapeError(f"conv2d expects x[C,H,W], w[O,C,k,k]; got {x.shape}, {w.shape}")
    o, ci, k, k2 = w.shape
    if k != k2 or k % 2 == 0:
        raise ShapeError(f"conv2d kernel must be square with odd extent, got {k}x{k2}")
    if ci != x.shape[0]:
        raise ShapeError(f"channel mismatch: input {x.shape[0]}, kernel {ci}")
    if stride < 1 or pad < 0:
        raise ShapeError(f"invalid stride={stride} pad={pad}")
    for extent in x.shape[1:]:
        if (extent + 2 * pad - k) % stride != 0:
            raise ShapeError(
                f"non-integral output extent: ({extent} + 2*{pad} - {k}) not divisible by {stride}"
            )
        if extent + 2 * pad < k:
            raise ShapeError(f"kernel {k} larger than padded extent {extent + 2 * pad}")
    y = kernels.conv2d_fwd(x, w, stride, pad)
    if b is not None:
        y = y + _as64(b)[:, None, None]
    return y


def conv2d_bwd(dy, x, w, stride=1, pad=0, with_bias=True):
    dy = _as64(dy)
    dx = kernels.conv2d_bwd_input(dy, w, stride, pad, x.shape[1], x.shape[2])
    dw = kernels.conv2d_bwd_kernel(dy, x, w.shape[2], stride, pad)
    db = dy.sum(axis=(1, 2)) if with_bias else None
    return dx, dw, db


# ---------------------------------------------------------------------------
# resampling


def avgpool2x(x):
    """2x2 mean pooling; both spatial extents must be even."""
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"avgpool2x needs even extents, got {h}x{w}")
    return x.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4))


def avgpool2x_bwd(dy):
    c, h, w = dy.shape
    out = np.empty((c, 2 * h, 2 * w))
    q = dy * 0.25
    out[:, 0::2, 0::2] = q
    out[:, 0::2, 1::2] = q
    out[:, 1::2, 0::2] = q
    out[:, 1::2, 1::2] = q
    return out


@lru_cache(maxsize=64)
def _upsample_matrix(n: int) -> np.ndarray:
    # 2x linear interpolation, align-corners-false, edge clamped
    m = np.zeros((2 * n, n))
    for j in range(2 * n):
        s = (j + 0.5) / 2.0 - 0.5
        i0 = int(np.floor(s))
        f = s - i0
        m[j, min(max(i0, 0), n - 1)] += 1.0 - f
        m[j, min(max(i0 + 1, 0), n - 1)] += f
    return m


def upsample2x(x):
    """Bilinear 2x upsample of x[C,H,W] (align-corners-false)."""
    if x.ndim != 3:
        raise ShapeError(f"upsample2x expects [C,H,W], got {x.shape}")
    c, h, w = x.shape
    wr = _upsample_matrix(h)
    wc = _upsample_matrix(w)
    tmp = x @ wc.T
    return np.einsum("rh,chw->crw", wr, tmp)


def upsample2x_bwd(dy, in_shape):
    _, h, w = in_shape
    wr = _upsample_matrix(h)
    wc = _upsample_matrix(w)
    tmp = np.einsum("rh,crw->chw", wr, dy)
    return tmp @ wc


def bilinear_sample(feat, cx, cy):
    """Sample feat[C,H,W] at float index coords (cx, cy); zero outside."""
    return kernels.bilinear_gather(_as64(feat), _as64(cx), _as64(cy))


def bilinear_sample_bwd(dout, feat, cx, cy):
    return kernels.bilinear_gather_bwd(_as64(dout), _as64(feat), _as64(cx), _as64(cy))


def corr_volume(fa, fb, cx, cy, radius=3):
    """Local correlation of fa[C,h,w] against fb sampled around (cx,cy)."""
    if fa.shape[0] != fb.shape[0]:
        raise ShapeError(f"channel mismatch {fa.shape[0]} vs {fb.shape[0]}")
    return kernels.corr_volume_fwd(_as64(fa), _as64(fb), _as64(cx), _as64(cy), radius)


def corr_volume_bwd(dcorr, fa, fb, cx, cy, radius=3):
    return kernels.corr_volume_bwd(
        _as64(dcorr), _as64(fa), _as64(fb), _as64(cx), _as64(cy), radius
    )


# ---------------------------------------------------------------------------
# pointwise / normalization


def relu(x):
    return np.maximum(x, 0.0)


def relu_bwd(dy, x):
    return dy * (x > 0.0)


def sigmoid(x):
    """Logistic function; logits are clipped to +-30 so output stays in (0,1)."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("sigmoid requires finite input")
    xc = np.clip(x, -SIGMOID_CLIP, SIGMOID_CLIP)
    out = np.empty_like(xc)
    pos = xc >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-xc[pos]))
    ex = np.exp(xc[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_bwd(dy, x, y):
    inside = np.abs(x) < SIGMOID_CLIP
    return dy * y * (1.0 - y) * inside


def softmax(x, axis=-1):
    """Max-shifted softmax along axis; rows sum to 1 for any finite input."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("softmax requires finite input")
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_bwd(dy, y, axis=-1):
    inner = (dy * y).sum(axis=axis, keepdims=True)
    return y * (dy - inner)


def log_softmax(x, axis=-1):
    x = np.asarray(x, dtype=np.float64)
    shifted = x - x.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def l2_normalize(x, axis=0, eps=1e-12):
    """Unit-normalize along axis; cache the pre-norm input for the backward."""
    norm = np.sqrt((x * x).sum(axis=axis, keepdims=True) + eps)
    return x / norm, norm


def l2_normalize_bwd(dy, y, norm, axis=0):
    inner = (dy * y).sum(axis=axis, keepdims=True)
    return (dy - y * inner) / norm


def softplus(x):
    # stable log(1 + e^x)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
