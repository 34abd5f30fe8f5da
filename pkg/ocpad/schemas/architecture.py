from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

ArchitectureKind = Literal["conv_ae", "pooling_ae", "dense_ae"]

# Command-line aliases for the architecture kinds.
ARCH_ALIASES = {"conv": "conv_ae", "pooling": "pooling_ae", "dense": "dense_ae"}


class AEArchitecture(BaseModel):
    """
    Autoencoder shape knobs. ``latent`` is only used by dense_ae.
    """

    model_config = ConfigDict(frozen=True)

    kind: ArchitectureKind = "dense_ae"
    channels: Literal[3, 4] = 4
    height: int = Field(default=32, ge=1)
    width: int = Field(default=96, ge=1)
    filters: int = Field(default=12, ge=1)
    latent: int = Field(default=64, ge=1)
    kernel: int = Field(default=3, ge=1)

    @property
    def input_shape(self):
        return (self.channels, self.height, self.width)

    @property
    def input_dim(self) -> int:
        return self.channels * self.height * self.width
