from ocpad.nn.network import ParamStore, Sequential, infer_shapes
from ocpad.nn.optim import RMSprop, rmsprop_step
from ocpad.nn.losses import (
    batch_loss,
    ishii_wmse_batch,
    loss_and_grad,
    loss_backward,
    mse_batch,
    proposed_wmse_batch,
    sample_score,
)

__all__ = [
    'ParamStore',
    'Sequential',
    'infer_shapes',
    'RMSprop',
    'rmsprop_step',
    'batch_loss',
    'ishii_wmse_batch',
    'loss_and_grad',
    'loss_backward',
    'mse_batch',
    'proposed_wmse_batch',
    'sample_score',
]
