"""
Score records exchanged between scoring and evaluation, and the DET curve
evaluation produces from them.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ocpad.errors import DataContractError
from ocpad.models.sample_set import ATTACK, BONAFIDE, LABELS


@dataclass
class ScoreSet:
    """
    Per-sample scores; higher means more anomalous.
    """

    sample_ids: List[str]
    labels: List[str]
    species: List[str]
    scores: np.ndarray

    def __post_init__(self):
        self.sample_ids = list(self.sample_ids)
        self.labels = list(self.labels)
        self.species = list(self.species)
        self.scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        n = len(self.sample_ids)
        if not (len(self.labels) == len(self.species) == self.scores.shape[0] == n):
            raise DataContractError("score set columns have different lengths")
        if len(set(self.sample_ids)) != n:
            raise DataContractError("sample ids are not unique")
        for sample_id, label in zip(self.sample_ids, self.labels):
            if label not in LABELS:
                raise DataContractError(f"sample {sample_id}: unknown label {label!r}")
        if not np.isfinite(self.scores).all():
            raise DataContractError("scores must be finite")

    @classmethod
    def for_samples(cls, samples, scores: Sequence[float]) -> "ScoreSet":
        return cls(sample_ids=samples.sample_ids, labels=samples.labels,
                   species=samples.species, scores=np.asarray(scores))

    def __len__(self) -> int:
        return len(self.sample_ids)

    @property
    def is_attack(self) -> np.ndarray:
        return np.array([label == ATTACK for label in self.labels], dtype=bool)

    @property
    def attack_scores(self) -> np.ndarray:
        return self.scores[self.is_attack]

    @property
    def bonafide_scores(self) -> np.ndarray:
        return self.scores[~self.is_attack]

    def require_both_classes(self) -> None:
        n_attack = int(self.is_attack.sum())
        if n_attack == 0:
            raise DataContractError("score set has no attack records")
        if n_attack == len(self):
            raise DataContractError(f"score set has no {BONAFIDE} records")

    def with_scores(self, scores: np.ndarray) -> "ScoreSet":
        return ScoreSet(self.sample_ids, self.labels, self.species, scores)

    def aligned_to(self, sample_ids: Sequence[str]) -> "ScoreSet":
        """
        The same records reordered to ``sample_ids``; the id sets must match.
        """
        if len(sample_ids) != len(self) or set(sample_ids) != set(self.sample_ids):
            raise DataContractError("score sets do not cover the same sample ids")
        position: Dict[str, int] = {sample_id: i for i, sample_id in enumerate(self.sample_ids)}
        order = [position[sample_id] for sample_id in sample_ids]
        return ScoreSet(
            sample_ids=[self.sample_ids[i] for i in order],
            labels=[self.labels[i] for i in order],
            species=[self.species[i] for i in order],
            scores=self.scores[order],
        )


@dataclass
class DetCurve:
    """
    Operating points sorted by APCER ascending (BPCER descending).
    ``thresholds`` rise from -inf to +inf.
    """

    thresholds: np.ndarray
    apcer: np.ndarray
    bpcer: np.ndarray

    def __len__(self) -> int:
        return self.thresholds.shape[0]

    def points(self):
        return list(zip(self.thresholds.tolist(), self.apcer.tolist(), self.bpcer.tolist()))
