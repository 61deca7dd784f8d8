"""Adaptive-moment optimizer with decoupled weight decay, plus the LR schedule."""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import GradientNaNError
from .params import Grads, ParamStore


def adamw_step(
    store: ParamStore,
    grads: Grads,
    lr: float,
    betas: tuple[float, float] = (0.9, 0.999),
    weight_decay: float = 0.0,
    eps: float = 1e-8,
) -> ParamStore:
    """One in-place update. Missing gradients count as zero; a non-finite
    gradient aborts before any parameter is touched."""
    for name in store.names():
        g = grads.get(name)
        if g is not None and not np.all(np.isfinite(g)):
            raise GradientNaNError(name)
    b1, b2 = betas
    store.step += 1
    t = store.step
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    for name in store.names():
        p = store.params[name]
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        m = store.m[name]
        v = store.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        update = (m / bc1) / (np.sqrt(v / bc2) + eps)
        if weight_decay != 0.0:
            update = update + weight_decay * p
        p -= lr * update
    return store


def lr_schedule(step: int, total: int, warmup: int, base_lr: float) -> float:
    """Linear ramp to base_lr over [0, warmup], cosine decay to 0 at total."""
    if step >= total:
        return 0.0
    if warmup > 0 and step < warmup:
        return base_lr * step / warmup
    if total == warmup:
        return base_lr
    frac = (step - warmup) / (total - warmup)
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * frac))
