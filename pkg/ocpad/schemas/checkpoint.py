from pydantic import BaseModel

from ocpad.schemas.architecture import AEArchitecture
from ocpad.schemas.loss import LossConfig
from ocpad.schemas.training import TrainingMetadata


class CheckpointHeader(BaseModel):
    """JSON header of an autoencoder checkpoint; parameters follow it."""

    architecture: AEArchitecture
    loss: LossConfig
    training: TrainingMetadata
    parameter_count: int
