"""
This module defines the SampleSet record: images plus per-sample metadata.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ocpad.errors import DataContractError

BONAFIDE = "bonafide"
ATTACK = "attack"
LABELS = (BONAFIDE, ATTACK)


@dataclass
class SampleSet:
    """
    Labeled multi-channel images, (N, d, H, W) float32 in [0, 1].
    """

    images: np.ndarray
    sample_ids: List[str]
    subject_ids: List[str]
    labels: List[str]
    species: List[str]

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float32)
        self.sample_ids = list(self.sample_ids)
        self.subject_ids = list(self.subject_ids)
        self.labels = list(self.labels)
        self.species = list(self.species)
        self.validate()

    def validate(self) -> None:
        if self.images.ndim != 4:
            raise DataContractError(f"images must be (N, d, H, W), got shape {self.images.shape}")
        n = self.images.shape[0]
        if self.images.shape[1] not in (3, 4):
            raise DataContractError(f"expected 3 or 4 channels, got {self.images.shape[1]}")
        for name in ("sample_ids", "subject_ids", "labels", "species"):
            if len(getattr(self, name)) != n:
                raise DataContractError(f"{name} has {len(getattr(self, name))} entries for {n} images")
        if len(set(self.sample_ids)) != n:
            raise DataContractError("sample ids are not unique")
        for sample_id, label, species in zip(self.sample_ids, self.labels, self.species):
            if label not in LABELS:
                raise DataContractError(f"sample {sample_id}: unknown label {label!r}")
            if (label == BONAFIDE) != (species == BONAFIDE):
                raise DataContractError(f"sample {sample_id}: bona fide samples carry species 'bonafide' only")
        if n and not (np.all(np.isfinite(self.images)) and self.images.min() >= 0 and self.images.max() <= 1):
            raise DataContractError("image values must lie in [0, 1]")

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def channels(self) -> int:
        return self.images.shape[1]

    @property
    def image_shape(self):
        return tuple(self.images.shape[1:])

    @property
    def is_attack(self) -> np.ndarray:
        return np.array([label == ATTACK for label in self.labels], dtype=bool)

    def has_attacks(self) -> bool:
        return bool(self.is_attack.any())

    def subset(self, selection: Sequence) -> "SampleSet":
        """
        Samples picked by a boolean mask or an index list, in that order.
        """
        selection = np.asarray(selection)
        if selection.dtype == bool:
            if selection.shape != (len(self),):
                raise DataContractError(f"mask of length {selection.shape} for {len(self)} samples")
            indices = np.flatnonzero(selection)
        else:
            indices = selection.astype(np.int64).reshape(-1)
        return SampleSet(
            images=self.images[indices],
            sample_ids=[self.sample_ids[i] for i in indices],
            subject_ids=[self.subject_ids[i] for i in indices],
            labels=[self.labels[i] for i in indices],
            species=[self.species[i] for i in indices],
        )

    def bonafide_only(self) -> "SampleSet":
        return self.subset(~self.is_attack)

    @classmethod
    def concat(cls, sets: Sequence["SampleSet"]) -> "SampleSet":
        if not sets:
            raise DataContractError("nothing to concatenate")
        shapes = {s.image_shape for s in sets}
        if len(shapes) != 1:
            raise DataContractError(f"cannot concatenate image shapes {sorted(shapes)}")
        return cls(
            images=np.concatenate([s.images for s in sets], axis=0),
            sample_ids=[i for s in sets for i in s.sample_ids],
            subject_ids=[i for s in sets for i in s.subject_ids],
            labels=[i for s in sets for i in s.labels],
            species=[i for s in sets for i in s.species],
        )

    def species_counts(self) -> Dict[str, int]:
        return dict(sorted(Counter(self.species).items()))

    def subjects(self) -> List[str]:
        return sorted(set(self.subject_ids))

    def equals(self, other: "SampleSet") -> bool:
        """Bit-exact equality, metadata included."""
        return (
            self.images.shape == other.images.shape
            and self.images.tobytes() == other.images.tobytes()
            and self.sample_ids == other.sample_ids
            and self.subject_ids == other.subject_ids
            and self.labels == other.labels
            and self.species == other.species
        )
