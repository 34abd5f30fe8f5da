"""
RMSprop optimizer.
"""

import logging
from typing import Tuple

import numpy as np

from ocpad.errors import ContractViolation, NumericalError, UsageError
from ocpad.nn.network import Params, ParamStore

logger = logging.getLogger(__name__)


def rmsprop_step(param: np.ndarray, grad: np.ndarray, accumulator: np.ndarray,
                 lr: float, rho: float, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    One RMSprop update; returns (new_param, new_accumulator).

        acc <- rho * acc + (1 - rho) * g^2
        p   <- p - lr * g / (sqrt(acc) + eps)
    """
    if param.shape != grad.shape or param.shape != accumulator.shape:
        raise ContractViolation(
            f"shape mismatch: param {param.shape}, grad {grad.shape}, accumulator {accumulator.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite gradient")
    grad = grad.astype(param.dtype, copy=False)
    accumulator = rho * accumulator + (1 - rho) * grad * grad
    param = param - lr * grad / (np.sqrt(accumulator) + eps)
    return param.astype(grad.dtype, copy=False), accumulator.astype(grad.dtype, copy=False)


class RMSprop:
    """
    Applies rmsprop_step to every parameter of a ParamStore in place.
    """

    def __init__(self, lr: float = 1e-3, rho: float = 0.9, eps: float = 1e-7):
        if lr <= 0:
            raise UsageError(f"learning rate must be > 0, got {lr}")
        if not 0 < rho < 1:
            raise UsageError(f"rho must be in (0, 1), got {rho}")
        if eps <= 0:
            raise UsageError(f"eps must be > 0, got {eps}")
        self.lr = lr
        self.rho = rho
        self.eps = eps

    def step(self, store: ParamStore, grads: Params) -> None:
        for index, entry in enumerate(grads):
            for name, grad in entry.items():
                try:
                    param, acc = rmsprop_step(store.params[index][name], grad,
                                              store.accumulators[index][name], self.lr, self.rho, self.eps)
                except NumericalError as exc:
                    logger.debug(f"RMSprop step failed at layer {index} ({name})")
                    raise NumericalError(f"layer {index} {name}: {exc.detail}") from exc
                store.params[index][name] = param
                store.accumulators[index][name] = acc
