from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Modality = Literal["swir", "laser"]

# Channels per capture modality: four SWIR wavelengths, three laser frames.
MODALITY_CHANNELS = {"swir": 4, "laser": 3}


class SpeciesSpec(BaseModel):
    """
    Rendering recipe for one synthetic PAI species.

    A full-coverage species replaces the fingertip with the material; an
    overlay blends the material over live skin with the given opacity.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    reflectance: List[float] = Field(description="per-channel multipliers for the SWIR stack")
    laser_reflectance: List[float] = Field(description="per-frame multipliers for the laser stack")
    ridge_contrast: float = Field(default=1.0, ge=0.0)
    frequency_jitter: float = Field(default=0.0, ge=0.0)
    orientation_jitter: float = Field(default=0.0, ge=0.0)
    noise: float = Field(default=0.0, ge=0.0)
    coverage: Literal["full", "overlay"] = "full"
    opacity: float = Field(default=1.0, gt=0.0, le=1.0)

    @field_validator("reflectance")
    @classmethod
    def validate_reflectance(cls, v):
        if len(v) != MODALITY_CHANNELS["swir"] or min(v) <= 0:
            raise ValueError("reflectance needs 4 positive multipliers")
        return v

    @field_validator("laser_reflectance")
    @classmethod
    def validate_laser_reflectance(cls, v):
        if len(v) != MODALITY_CHANNELS["laser"] or min(v) <= 0:
            raise ValueError("laser_reflectance needs 3 positive multipliers")
        return v

    @model_validator(mode="after")
    def validate_coverage(self):
        if self.coverage == "full" and self.opacity != 1.0:
            raise ValueError("full-coverage species are opaque")
        return self

    def multipliers(self, modality: Modality) -> List[float]:
        return self.reflectance if modality == "swir" else self.laser_reflectance


def default_species() -> List[SpeciesSpec]:
    """
    The four PAI groups: full fake fingers and three overlay opacities.
    """
    return [
        SpeciesSpec(name="fakefinger", reflectance=[0.55, 0.6, 0.7, 0.85],
                    laser_reflectance=[0.7, 0.72, 0.74], ridge_contrast=0.5,
                    frequency_jitter=0.2, orientation_jitter=0.3, noise=0.01),
        SpeciesSpec(name="overlay_opaque", reflectance=[0.6, 0.7, 0.8, 1.2],
                    laser_reflectance=[0.8, 0.8, 0.8], ridge_contrast=0.3,
                    frequency_jitter=0.1, noise=0.01, coverage="overlay", opacity=0.9),
        SpeciesSpec(name="overlay_semi", reflectance=[0.7, 0.78, 0.9, 1.3],
                    laser_reflectance=[0.8, 0.82, 0.86], ridge_contrast=0.6,
                    frequency_jitter=0.1, coverage="overlay", opacity=0.7),
        SpeciesSpec(name="overlay_transparent", reflectance=[0.7, 0.8, 0.95, 1.35],
                    laser_reflectance=[0.85, 0.86, 0.9], ridge_contrast=0.8,
                    frequency_jitter=0.05, coverage="overlay", opacity=0.5),
    ]


class DatasetConfig(BaseModel):
    """
    Synthetic database recipe. Attack presentations get their own
    pseudo-subjects so they never share an id with a bona fide subject.
    """

    seed: int = 42
    height: int = Field(default=32, ge=1, le=65535)
    width: int = Field(default=96, ge=1, le=65535)
    subjects: int = Field(default=50, ge=1)
    bonafide: int = Field(default=1000, ge=0)
    attacks_per_species: int = Field(default=100, ge=0)
    attack_subjects: int = Field(default=20, ge=1)
    noise: float = Field(default=0.02, ge=0.0)
    species: List[SpeciesSpec] = Field(default_factory=default_species)
    species_counts: Optional[List[int]] = None

    @model_validator(mode="after")
    def validate_counts(self):
        if self.species_counts is not None:
            if len(self.species_counts) != len(self.species):
                raise ValueError("species_counts needs one count per species")
            if min(self.species_counts, default=0) < 0:
                raise ValueError("species counts must be >= 0")
        names = [s.name for s in self.species]
        if len(set(names)) != len(names) or "bonafide" in names:
            raise ValueError("species names must be unique and not 'bonafide'")
        return self

    def counts(self) -> List[int]:
        if self.species_counts is not None:
            return list(self.species_counts)
        return [self.attacks_per_species] * len(self.species)
