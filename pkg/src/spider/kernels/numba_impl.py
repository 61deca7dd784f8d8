"""Numba kernel backend: explicit loops under @njit.

fastmath stays off so accumulation follows IEEE order and the conv kernels
match the numpy backend bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def conv2d_fwd(x, w, stride, pad):
    c, h, ww = x.shape
    o, _, k, _ = w.shape
    ho = (h + 2 * pad - k) // stride + 1
    wo = (ww + 2 * pad - k) // stride + 1
    out = np.zeros((o, ho, wo))
    for oi in range(o):
        for i in range(ho):
            for j in range(wo):
                acc = 0.0
                for ci in range(c):
                    for ky in range(k):
                        yy = i * stride + ky - pad
                        if yy < 0 or yy >= h:
                            continue
                        for kx in range(k):
                            xx = j * stride + kx - pad
                            if 0 <= xx < ww:
                                acc += w[oi, ci, ky, kx] * x[ci, yy, xx]
                out[oi, i, j] = acc
    return out


@njit(cache=True)
def conv2d_bwd_input(dy, w, stride, pad, h, ww):
    o, c, k, _ = w.shape
    _, ho, wo = dy.shape
    dx = np.zeros((c, h, ww))
    for oi in range(o):
        for i in range(ho):
            for j in range(wo):
                g = dy[oi, i, j]
                for ci in range(c):
                    for ky in range(k):
                        yy = i * stride + ky - pad
                        if yy < 0 or yy >= h:
                            continue
                        for kx in range(k):
                            xx = j * stride + kx - pad
                            if 0 <= xx < ww:
                                dx[ci, yy, xx] += w[oi, ci, ky, kx] * g
    return dx


@njit(cache=True)
def conv2d_bwd_kernel(dy, x, k, stride, pad):
    c, h, ww = x.shape
    o, ho, wo = dy.shape
    dw = np.zeros((o, c, k, k))
    for oi in range(o):
        for i in range(ho):
            for j in range(wo):
                g = dy[oi, i, j]
                for ci in range(c):
                    for ky in range(k):
                        yy = i * stride + ky - pad
                        if yy < 0 or yy >= h:
                            continue
                        for kx in range(k):
                            xx = j * stride + kx - pad
                            if 0 <= xx < ww:
                                dw[oi, ci, ky, kx] += g * x[ci, yy, xx]
    return dw


@njit(cache=True)
def bilinear_gather(feat, cx, cy):
    c, h, w = feat.shape
    hh, wwo = cx.shape
    out = np.zeros((c, hh, wwo))
    for i in range(hh):
        for j in range(wwo):
            x = cx[i, j]
            y = cy[i, j]
            x0 = int(np.floor(x))
            y0 = int(np.floor(y))
            fx = x - x0
            fy = y - y0
            for oy in range(2):
                yy = y0 + oy
                if yy < 0 or yy >= h:
                    continue
                wy = fy if oy == 1 else 1.0 - fy
                for ox in range(2):
                    xx = x0 + ox
                    if xx < 0 or xx >= w:
                        continue
                    wt = wy * (fx if ox == 1 else 1.0 - fx)
                    for ci in range(c):
                        out[ci, i, j] += feat[ci, yy, xx] * wt
    return out


@njit(cache=True)
def bilinear_gather_bwd(dout, feat, cx, cy):
    c, h, w = feat.shape
    hh, wwo = cx.shape
    dfeat = np.zeros_like(feat)
    dcx = np.zeros_like(cx)
    dcy = np.zeros_like(cy)
    for i in range(hh):
        for j in range(wwo):
            x = cx[i, j]
            y = cy[i, j]
            x0 = int(np.floor(x))
            y0 = int(np.floor(y))
            fx = x - x0
            fy = y - y0
            gx = 0.0
            gy = 0.0
            for oy in range(2):
                yy = y0 + oy
                if yy < 0 or yy >= h:
                    continue
                wy = fy if oy == 1 else 1.0 - fy
                dwy = 1.0 if oy == 1 else -1.0
                for ox in range(2):
                    xx = x0 + ox
                    if xx < 0 or xx >= w:
                        continue
                    wx = fx if ox == 1 else 1.0 - fx
                    dwx = 1.0 if ox == 1 else -1.0
                    wt = wy * wx
                    dd = 0.0
                    for ci in range(c):
                        g = dout[ci, i, j]
                        dfeat[ci, yy, xx] += g * wt
                        dd += g * feat[ci, yy, xx]
                    gx += dd * wy * dwx
                    gy += dd * dwy * wx
            dcx[i, j] = gx
            dcy[i, j] = gy
    return dfeat, dcx, dcy


@njit(cache=True)
def corr_volume_fwd(fa, fb, cx, cy, radius):
    c, hb, wb = fb.shape
    hh, wwo = cx.shape
    d = 2 * radius + 1
    out = np.zeros((d * d, hh, wwo))
    scale = 1.0 / np.sqrt(c)
    for i in range(hh):
        for j in range(wwo):
            idx = 0
            for oy in range(-radius, radius + 1):
                for ox in range(-radius, radius + 1):
                    x = cx[i, j] + ox
                    y = cy[i, j] + oy
                    x0 = int(np.floor(x))
                    y0 = int(np.floor(y))
                    fx = x - x0
                    fy = y - y0
                    acc = 0.0
                    for ci in range(c):
                        s = 0.0
                        for qy in range(2):
                            yy = y0 + qy
                            if yy < 0 or yy >= hb:
                                continue
                            wy = fy if qy == 1 else 1.0 - fy
                            for qx in range(2):
                                xx = x0 + qx
                                if xx < 0 or xx >= wb:
                                    continue
                                wt = wy * (fx if qx == 1 else 1.0 - fx)
                                s += fb[ci, yy, xx] * wt
                        acc += fa[ci, i, j] * s
                    out[idx, i, j] = acc * scale
                    idx += 1
    return out


@njit(cache=True)
def corr_volume_bwd(dcorr, fa, fb, cx, cy, radius):
    c, hb, wb = fb.shape
    hh, wwo = cx.shape
    scale = 1.0 / np.sqrt(c)
    dfa = np.zeros_like(fa)
    dfb = np.zeros_like(fb)
    dcx = np.zeros_like(cx)
    dcy = np.zeros_like(cy)
    for i in range(hh):
        for j in range(wwo):
            idx = 0
            for oy in range(-radius, radius + 1):
                for ox in range(-radius, radius + 1):
                    g = dcorr[idx, i, j] * scale
                    idx += 1
                    if g == 0.0:
                        continue
                    x = cx[i, j] + ox
                    y = cy[i, j] + oy
                    x0 = int(np.floor(x))
                    y0 = int(np.floor(y))
                    fx = x - x0
                    fy = y - y0
                    gx = 0.0
                    gy = 0.0
                    for ci in range(c):
                        a = fa[ci, i, j]
                        s = 0.0
                        for qy in range(2):
                            yy = y0 + qy
                            if yy < 0 or yy >= hb:
                                continue
                            wy = fy if qy == 1 else 1.0 - fy
                            dwy = 1.0 if qy == 1 else -1.0
                            for qx in range(2):
                                xx = x0 + qx
                                if xx < 0 or xx >= wb:
                                    continue
                                wx = fx if qx == 1 else 1.0 - fx
                                dwx = 1.0 if qx == 1 else -1.0
                                wt = wy * wx
                                v = fb[ci, yy, xx]
                                s += v * wt
                                dfb[ci, yy, xx] += g * a * wt
                                gx += g * a * v * wy * dwx
                                gy += g * a * v * dwy * wx
                        dfa[ci, i, j] += g * s
                    dcx[i, j] += gx
                    dcy[i, j] += gy
    return dfa, dfb, dcx, dcy
