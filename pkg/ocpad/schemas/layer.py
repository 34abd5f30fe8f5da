from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

LayerKind = Literal["conv", "maxpool", "upsample", "dense", "flatten", "reshape", "crop", "relu", "sigmoid"]


class LayerSpec(BaseModel):
    """
    One layer of a sequential chain.

    Only the fields of the layer's own kind are meaningful:
    conv uses out_channels/kernel/stride/padding, maxpool and upsample use
    factor, dense uses units, reshape and crop use shape (C, H, W).
    """

    model_config = ConfigDict(frozen=True)

    kind: LayerKind
    out_channels: Optional[int] = None
    kernel: int = 3
    stride: int = 1
    padding: Literal["same"] = "same"
    factor: int = 2
    units: Optional[int] = None
    shape: Optional[List[int]] = None

    @field_validator("factor")
    @classmethod
    def validate_factor(cls, v):
        if v != 2:
            raise ValueError("only a factor of 2 is supported")
        return v

    @model_validator(mode="after")
    def validate_kind_fields(self):
        if self.kind == "conv":
            if self.out_channels is None or self.out_channels < 1:
                raise ValueError("conv out_channels must be >= 1")
            if self.stride not in (1, 2):
                raise ValueError("conv stride must be 1 or 2")
            if self.kernel < 1 or self.kernel % 2 == 0:
                raise ValueError("conv kernel must be odd and >= 1")
        elif self.kind == "dense":
            if self.units is None or self.units < 1:
                raise ValueError("dense units must be >= 1")
        elif self.kind in ("reshape", "crop"):
            if self.shape is None or len(self.shape) != 3 or min(self.shape) < 1:
                raise ValueError(f"{self.kind} needs a positive (C, H, W) shape")
        return self

    @property
    def has_params(self) -> bool:
        return self.kind in ("conv", "dense")


def conv(out_channels: int, kernel: int = 3, stride: int = 1) -> LayerSpec:
    return LayerSpec(kind="conv", out_channels=out_channels, kernel=kernel, stride=stride)


def dense(units: int) -> LayerSpec:
    return LayerSpec(kind="dense", units=units)


def layer(kind: LayerKind, shape: Optional[List[int]] = None) -> LayerSpec:
    return LayerSpec(kind=kind, shape=shape)
