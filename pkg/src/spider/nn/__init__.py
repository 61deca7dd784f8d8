from .params import Grads, ParamStore
from .optim import adamw_step, lr_schedule
from .gradcheck import GradReport, grad_check

__all__ = [
    "Grads",
    "ParamStore",
    "adamw_step",
    "lr_schedule",
    "GradReport",
    "grad_check",
]
