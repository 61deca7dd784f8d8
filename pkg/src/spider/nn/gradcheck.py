"""Central-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import NondeterministicLossError
from .params import ParamStore


@dataclass
class GradReport:
    """Per-parameter max relative error between analytic and numeric gradients."""

    per_param: dict[str, float] = field(default_factory=dict)
    tol: float = 1e-4
    eps: float = 1e-5

    @property
    def max_rel_err(self) -> float:
        return max(self.per_param.values()) if self.per_param else 0.0

    @property
    def worst_param(self) -> str:
        if not self.per_param:
            return ""
        return max(self.per_param, key=self.per_param.get)

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"gradcheck {status}: max rel err {self.max_rel_err:.3e} (tol {self.tol:g})"]
        for name in sorted(self.per_param, key=self.per_param.get, reverse=True):
            err = self.per_param[name]
            mark = "" if err < self.tol else "  <-- over tolerance"
            lines.append(f"  {name}: {err:.3e}{mark}")
        return "\n".join(lines)


def grad_check(loss_fn, store: ParamStore, eps: float = 1e-5, tol: float = 1e-4) -> GradReport:
    """Compare loss_fn's analytic gradients against central differences.

    loss_fn(store, with_grads) must return (loss, grads-or-None) and be
    deterministic; that is verified by running the forward pass twice.
    Every scalar parameter is perturbed by +-eps in place and restored.
    """
    loss0, grads = loss_fn(store, True)
    loss1, _ = loss_fn(store, False)
    if loss0 != loss1:
        raise NondeterministicLossError(
            f"two forward passes disagree: {loss0!r} vs {loss1!r}"
        )
    report = GradReport(tol=tol, eps=eps)
    for name in store.names():
        p = store.params[name]
        analytic = grads.get(name)
        if analytic is None:
            analytic = np.zeros_like(p)
        worst = 0.0
        flat = p.reshape(-1)
        aflat = np.asarray(analytic).reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            lp, _ = loss_fn(store, False)
            flat[idx] = orig - eps
            lm, _ = loss_fn(store, False)
            flat[idx] = orig
            numeric = (lp - lm) / (2.0 * eps)
            a = aflat[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if rel > worst:
                worst = rel
        report.per_param[name] = worst
    return report
