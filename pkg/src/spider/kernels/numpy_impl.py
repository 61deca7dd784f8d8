"""Pure-numpy kernel backend.

Accumulation runs in (channel, ky, kx) order per output scalar so results
match the numba backend and a nested-loop reference bit for bit.
"""

from __future__ import annotations

import numpy as np


def _pad_input(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    c, h, w = x.shape
    xp = np.zeros((c, h + 2 * pad, w + 2 * pad), dtype=x.dtype)
    xp[:, pad : pad + h, pad : pad + w] = x
    return xp


def conv2d_fwd(x, w, stride, pad):
    """Cross-correlation of x[C,H,W] with w[O,C,k,k] -> y[O,Ho,Wo]."""
    c, h, ww = x.shape
    o, _, k, _ = w.shape
    ho = (h + 2 * pad - k) // stride + 1
    wo = (ww + 2 * pad - k) // stride + 1
    xp = _pad_input(x, pad)
    out = np.zeros((o, ho, wo), dtype=np.float64)
    for ci in range(c):
        for ky in range(k):
            for kx in range(k):
                patch = xp[ci, ky : ky + ho * stride : stride, kx : kx + wo * stride : stride]
                out += w[:, ci, ky, kx][:, None, None] * patch[None, :, :]
    return out


def conv2d_bwd_input(dy, w, stride, pad, h, ww):
    o, c, k, _ = w.shape
    _, ho, wo = dy.shape
    dxp = np.zeros((c, h + 2 * pad, ww + 2 * pad), dtype=np.float64)
    for ci in range(c):
        for ky in range(k):
            for kx in range(k):
                contrib = np.tensordot(w[:, ci, ky, kx], dy, axes=(0, 0))
                dxp[ci, ky : ky + ho * stride : stride, kx : kx + wo * stride : stride] += contrib
    if pad == 0:
        return dxp
    return dxp[:, pad : pad + h, pad : pad + ww].copy()


def conv2d_bwd_kernel(dy, x, k, stride, pad):
    c = x.shape[0]
    o, ho, wo = dy.shape
    xp = _pad_input(x, pad)
    dw = np.zeros((o, c, k, k), dtype=np.float64)
    for ci in range(c):
        for ky in range(k):
            for kx in range(k):
                patch = xp[ci, ky : ky + ho * stride : stride, kx : kx + wo * stride : stride]
                dw[:, ci, ky, kx] = np.tensordot(dy, patch, axes=([1, 2], [0, 1]))
    return dw


def _bilinear_parts(h, w, cx, cy):
    x0 = np.floor(cx)
    y0 = np.floor(cy)
    fx = cx - x0
    fy = cy - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    x1 = x0 + 1
    y1 = y0 + 1
    parts = []
    for yy, xx, wt in (
        (y0, x0, (1.0 - fy) * (1.0 - fx)),
        (y0, x1, (1.0 - fy) * fx),
        (y1, x0, fy * (1.0 - fx)),
        (y1, x1, fy * fx),
    ):
        ok = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        parts.append((np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1), wt, ok))
    return parts, fx, fy, x0, y0


def bilinear_gather(feat, cx, cy):
    """Sample feat[C,H,W] at float coords (cx, cy) [h,w]; zero outside."""
    c, h, w = feat.shape
    parts, _, _, _, _ = _bilinear_parts(h, w, cx, cy)
    out = np.zeros((c,) + cx.shape, dtype=np.float64)
    for yy, xx, wt, ok in parts:
        out += feat[:, yy, xx] * (wt * ok)[None, :, :]
    return out


def bilinear_gather_bwd(dout, feat, cx, cy):
    c, h, w = feat.shape
    x0 = np.floor(cx)
    y0 = np.floor(cy)
    fx = cx - x0
    fy = cy - y0
    x0i = x0.astype(np.int64)
    y0i = y0.astype(np.int64)
    dfeat = np.zeros_like(feat)
    dcx = np.zeros_like(cx)
    dcy = np.zeros_like(cy)
    # corner layout: (dy_idx, dx_idx) in {0,1}^2, weight and its coord derivs
    corners = (
        (0, 0, (1 - fy) * (1 - fx), -(1 - fy), -(1 - fx)),
        (0, 1, (1 - fy) * fx, (1 - fy), -fx),
        (1, 0, fy * (1 - fx), -fy, (1 - fx)),
        (1, 1, fy * fx, fy, fx),
    )
    dsum = dout.sum(axis=0) if c == 1 else None
    for oy, ox, wt, dwdx, dwdy in corners:
        yy = y0i + oy
        xx = x0i + ox
        ok = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        yyc = np.clip(yy, 0, h - 1)
        xxc = np.clip(xx, 0, w - 1)
        vals = feat[:, yyc, xxc]
        # dot of dout with the corner values, per sample
        dd = np.einsum("cij,cij->ij", dout, vals) if dsum is None else dsum * vals[0]
        dd = dd * ok
        dcx += dd * dwdx
        dcy += dd * dwdy
        contrib = dout * (wt * ok)[None, :, :]
        np.add.at(dfeat, (slice(None), yyc, xxc), contrib)
    return dfeat, dcx, dcy


def corr_volume_fwd(fa, fb, cx, cy, radius):
    """Local correlation: dot(fa(p), fb sampled at (cx,cy)+offset) / sqrt(C)."""
    c = fa.shape[0]
    d = 2 * radius + 1
    out = np.zeros((d * d,) + cx.shape, dtype=np.float64)
    scale = 1.0 / np.sqrt(c)
    idx = 0
    for oy in range(-radius, radius + 1):
        for ox in range(-radius, radius + 1):
            sampled = bilinear_gather(fb, cx + ox, cy + oy)
            out[idx] = np.einsum("cij,cij->ij", fa, sampled) * scale
            idx += 1
    return out


def corr_volume_bwd(dcorr, fa, fb, cx, cy, radius):
    c = fa.shape[0]
    scale = 1.0 / np.sqrt(c)
    dfa = np.zeros_like(fa)
    dfb = np.zeros_like(fb)
    dcx = np.zeros_like(cx)
    dcy = np.zeros_like(cy)
    idx = 0
    for oy in range(-radius, radius + 1):
        for ox in range(-radius, radius + 1):
            g = dcorr[idx] * scale
            sampled = bilinear_gather(fb, cx + ox, cy + oy)
            dfa += g[None, :, :] * sampled
            dsampled = g[None, :, :] * fa
            dfb_i, dcx_i, dcy_i = bilinear_gather_bwd(dsampled, fb, cx + ox, cy + oy)
            dfb += dfb_i
            dcx += dcx_i
            dcy += dcy_i
            idx += 1
    return dfa, dfb, dcx, dcy
