from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

LossKind = Literal["mse", "ishii_wmse", "proposed_wmse"]

# Command-line aliases for the loss kinds.
LOSS_ALIASES = {"mse": "mse", "ishii": "ishii_wmse", "wmse": "proposed_wmse"}


class LossConfig(BaseModel):
    """
    Reconstruction-error configuration.

    ``c`` is the threshold multiplier of the pixel-masked loss; ``alpha`` is the
    quantile level of the sample-masked loss. They are separate knobs even though
    both are often written as C.
    """

    model_config = ConfigDict(frozen=True)

    kind: LossKind = "mse"
    c: float = Field(default=1.8, ge=0.0)
    alpha: float = Field(default=0.9, gt=0.0, le=1.0)
