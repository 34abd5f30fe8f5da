"""
JSON documents for fitted one-class baselines.
"""

from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field


class ScalerDocument(BaseModel):
    mean: List[float]
    scale: List[float]


class GmmDocument(BaseModel):
    kind: Literal["gmm"] = "gmm"
    weights: List[float]
    means: List[List[float]]
    variances: List[List[float]]
    log_likelihoods: List[float] = Field(default_factory=list)
    iterations: int = 0
    scaler: Optional[ScalerDocument] = None


class OcSvmDocument(BaseModel):
    kind: Literal["svm"] = "svm"
    nu: float
    gamma: float
    support_vectors: List[List[float]]
    coefficients: List[float]
    rho: float
    iterations: int = 0
    scaler: Optional[ScalerDocument] = None


class BaselineDocument(BaseModel):
    model: Union[GmmDocument, OcSvmDocument] = Field(discriminator="kind")
