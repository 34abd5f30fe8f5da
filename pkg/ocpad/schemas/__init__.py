from ocpad.schemas.layer import LayerSpec
from ocpad.schemas.loss import LOSS_ALIASES, LossConfig
from ocpad.schemas.architecture import ARCH_ALIASES, AEArchitecture
from ocpad.schemas.dataset import MODALITY_CHANNELS, DatasetConfig, SpeciesSpec, default_species
from ocpad.schemas.training import TrainingConfig, TrainingMetadata
from ocpad.schemas.checkpoint import CheckpointHeader
from ocpad.schemas.baseline import BaselineDocument, GmmDocument, OcSvmDocument, ScalerDocument
from ocpad.schemas.report import (
    EvaluationReport,
    ExperimentRun,
    ExperimentSummary,
    FusionEntry,
    FusionReport,
    Manifest,
    OperatingPoint,
)
from ocpad.schemas.experiment import ExperimentConfig

__all__ = [
    'LayerSpec',
    'LOSS_ALIASES',
    'LossConfig',
    'ARCH_ALIASES',
    'AEArchitecture',
    'MODALITY_CHANNELS',
    'DatasetConfig',
    'SpeciesSpec',
    'default_species',
    'TrainingConfig',
    'TrainingMetadata',
    'CheckpointHeader',
    'BaselineDocument',
    'GmmDocument',
    'OcSvmDocument',
    'ScalerDocument',
    'EvaluationReport',
    'ExperimentRun',
    'ExperimentSummary',
    'FusionEntry',
    'FusionReport',
    'Manifest',
    'OperatingPoint',
    'ExperimentConfig',
]
