"""
This module defines the AEModel record. Building, training and scoring live
in ocpad.services.autoencoder.
"""

from dataclasses import dataclass, field
from typing import List

from ocpad.nn.network import ParamStore, Sequential
from ocpad.schemas.architecture import AEArchitecture
from ocpad.schemas.layer import LayerSpec
from ocpad.schemas.loss import LossConfig
from ocpad.schemas.training import TrainingMetadata


@dataclass
class AEModel:
    """
    An autoencoder: layer chain, parameters, loss and training record.

    Layers ``[0, encoder_layers)`` form the encoder; the latent vector is
    their flattened output.
    """

    architecture: AEArchitecture
    specs: List[LayerSpec]
    encoder_layers: int
    params: ParamStore
    loss: LossConfig
    metadata: TrainingMetadata = field(default_factory=TrainingMetadata)

    def __post_init__(self):
        self.network = Sequential(self.specs, self.architecture.input_shape)

    @property
    def input_shape(self):
        return self.architecture.input_shape

    @property
    def latent_width(self) -> int:
        shape = self.network.shapes[self.encoder_layers]
        width = 1
        for d in shape:
            width *= d
        return width

    def parameter_count(self) -> int:
        return self.params.parameter_count()
