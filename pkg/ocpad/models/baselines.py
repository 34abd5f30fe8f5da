"""
Fitted one-class baselines and the feature scaler they share, with mappings
to and from their JSON documents.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ocpad.errors import DataContractError
from ocpad.schemas.baseline import GmmDocument, OcSvmDocument, ScalerDocument


def _check_features(features: np.ndarray, dim: int) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[None, :]
    if features.ndim != 2 or features.shape[1] != dim:
        raise DataContractError(f"expected {dim}-dimensional features, got shape {features.shape}")
    return features


@dataclass
class FeatureScaler:
    """
    Per-dimension standardization from training statistics.
    Dimensions with zero variance get scale 1.
    """

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "FeatureScaler":
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] < 1:
            raise DataContractError(f"need a non-empty (n, D) feature matrix, got shape {features.shape}")
        std = features.std(axis=0)
        return cls(mean=features.mean(axis=0), scale=np.where(std > 0, std, 1.0))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (_check_features(features, self.dim) - self.mean) / self.scale

    def to_document(self) -> ScalerDocument:
        return ScalerDocument(mean=self.mean.tolist(), scale=self.scale.tolist())

    @classmethod
    def from_document(cls, doc: ScalerDocument) -> "FeatureScaler":
        return cls(mean=np.array(doc.mean), scale=np.array(doc.scale))


@dataclass
class GmmModel:
    """
    Diagonal-covariance Gaussian mixture.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_likelihoods: List[float] = field(default_factory=list)
    iterations: int = 0
    scaler: Optional[FeatureScaler] = None

    @property
    def components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def check(self, features: np.ndarray) -> np.ndarray:
        return _check_features(features, self.dim)

    def to_document(self) -> GmmDocument:
        return GmmDocument(
            weights=self.weights.tolist(), means=self.means.tolist(),
            variances=self.variances.tolist(), log_likelihoods=list(self.log_likelihoods),
            iterations=self.iterations,
            scaler=self.scaler.to_document() if self.scaler else None,
        )

    @classmethod
    def from_document(cls, doc: GmmDocument) -> "GmmModel":
        return cls(
            weights=np.array(doc.weights), means=np.array(doc.means),
            variances=np.array(doc.variances), log_likelihoods=list(doc.log_likelihoods),
            iterations=doc.iterations,
            scaler=FeatureScaler.from_document(doc.scaler) if doc.scaler else None,
        )


@dataclass
class OcSvmModel:
    """
    nu one-class SVM with an RBF kernel, reduced to its support vectors.
    """

    nu: float
    gamma: float
    support_vectors: np.ndarray
    coefficients: np.ndarray
    rho: float
    iterations: int = 0
    scaler: Optional[FeatureScaler] = None

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    def check(self, features: np.ndarray) -> np.ndarray:
        return _check_features(features, self.dim)

    def to_document(self) -> OcSvmDocument:
        return OcSvmDocument(
            nu=self.nu, gamma=self.gamma, support_vectors=self.support_vectors.tolist(),
            coefficients=self.coefficients.tolist(), rho=self.rho, iterations=self.iterations,
            scaler=self.scaler.to_document() if self.scaler else None,
        )

    @classmethod
    def from_document(cls, doc: OcSvmDocument) -> "OcSvmModel":
        return cls(
            nu=doc.nu, gamma=doc.gamma,
            support_vectors=np.array(doc.support_vectors, dtype=np.float64).reshape(len(doc.coefficients), -1),
            coefficients=np.array(doc.coefficients), rho=doc.rho, iterations=doc.iterations,
            scaler=FeatureScaler.from_document(doc.scaler) if doc.scaler else None,
        )
