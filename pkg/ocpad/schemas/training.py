from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class TrainingConfig(BaseModel):
    """Optimizer and schedule knobs for autoencoder training."""

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(default=20, ge=0)
    batch_size: int = Field(default=32, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    rho: float = Field(default=0.9, gt=0.0, lt=1.0)
    eps: float = Field(default=1e-7, gt=0.0)
    seed: int = 42


class TrainingMetadata(BaseModel):
    """
    What a training run did. ``val_losses[0]`` is measured before any
    update; entry ``e`` is measured after epoch ``e``.
    """

    seed: int = 0
    epochs_run: int = 0
    best_epoch: int = 0
    initial_val_loss: Optional[float] = None
    best_val_loss: Optional[float] = None
    final_val_loss: Optional[float] = None
    train_losses: List[float] = Field(default_factory=list)
    val_losses: List[float] = Field(default_factory=list)
