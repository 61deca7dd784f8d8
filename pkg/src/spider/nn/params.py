"""Named parameter storage with optimizer moment state."""

from __future__ import annotations

import numpy as np

from ..exceptions import ShapeError


class Grads(dict):
    """name -> gradient array, with accumulation."""

    def accum(self, name: str, g: np.ndarray) -> None:
        if name in self:
            self[name] += g
        else:
            self[name] = np.array(g, dtype=np.float64)


class ParamStore:
    """Float64 parameter tensors keyed by name, plus AdamW moments.

    Moments are lazily shape-matched to their parameter; the step counter
    only moves forward.
    """

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.step = 0

    def add(self, name: str, value: np.ndarray) -> None:
        if name in self.params:
            raise ShapeError(f"duplicate parameter name '{name}'")
        arr = np.array(value, dtype=np.float64)
        self.params[name] = arr
        self.m[name] = np.zeros_like(arr)
        self.v[name] = np.zeros_like(arr)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        if name not in self.params:
            raise KeyError(name)
        if self.params[name].shape != np.shape(value):
            raise ShapeError(f"shape change for '{name}'")
        self.params[name] = np.array(value, dtype=np.float64)

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def names(self) -> list[str]:
        return sorted(self.params)

    def num_scalars(self) -> int:
        return sum(p.size for p in self.params.values())

    def copy(self) -> "ParamStore":
        out = ParamStore()
        for name, p in self.params.items():
            out.params[name] = p.copy()
            out.m[name] = self.m[name].copy()
            out.v[name] = self.v[name].copy()
        out.step = self.step
        return out
