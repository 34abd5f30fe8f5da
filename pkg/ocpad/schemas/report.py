from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

# Thresholds may be +-inf; keep them as JSON Infinity rather than null.
INF_AS_CONSTANTS = ConfigDict(ser_json_inf_nan="constants")


class OperatingPoint(BaseModel):
    model_config = INF_AS_CONSTANTS

    target_bpcer: float
    threshold: float
    apcer: float
    bpcer: float


class EvaluationReport(BaseModel):
    """
    Headline PAD metrics for one score set. pAUC is in percent,
    every other rate is a proportion.
    """

    model_config = INF_AS_CONSTANTS

    label: str = ""
    n_bonafide: int
    n_attack: int
    d_eer: float
    d_eer_threshold: float
    pauc20: float
    operating_points: List[OperatingPoint]
    species_apcer: Dict[str, float] = Field(default_factory=dict)
    worst_species: Optional[str] = None
    worst_species_apcer: float = 0.0
    missed_attacks: Dict[str, int] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    def apcer_at(self, target_bpcer: float) -> float:
        for point in self.operating_points:
            if point.target_bpcer == target_bpcer:
                return point.apcer
        raise KeyError(target_bpcer)


class FusionEntry(BaseModel):
    weight: float
    report: EvaluationReport


class FusionReport(BaseModel):
    """
    A weight sweep. ``degenerate`` names sources whose normalization
    range was empty and which therefore contributed a constant.
    """

    entries: List[FusionEntry]
    degenerate: List[str] = Field(default_factory=list)
    stats_source: str = "reference"


class MissedOverlap(BaseModel):
    """
    Test attacks two sources let through, each at its own operating point
    for ``target_bpcer``. ``first_shared`` is the share of the first
    source's misses that the second also misses; None when the first
    misses nothing.
    """

    target_bpcer: float
    sources: List[str]
    missed: Dict[str, List[str]]
    shared: List[str]
    first_shared: Optional[float] = None


class Manifest(BaseModel):
    """
    Generated-data inventory. ``generated_at`` is the only field that
    changes between identical runs.
    """

    seed: int
    height: int
    width: int
    modalities: List[str]
    files: Dict[str, str]
    counts: Dict[str, Dict[str, int]]
    subjects: Dict[str, int]
    checksums: Dict[str, str]
    generated_at: Optional[str] = None


class ExperimentRun(BaseModel):
    """One trained or fitted configuration inside an experiment."""

    name: str
    report: EvaluationReport
    initial_val_loss: Optional[float] = None
    final_val_loss: Optional[float] = None
    score_file: Optional[str] = None
    det_file: Optional[str] = None
    hyperparameters: Dict[str, float] = Field(default_factory=dict)


class ExperimentSummary(BaseModel):
    experiment: str
    seed: int
    runs: List[ExperimentRun] = Field(default_factory=list)
    fusion: Optional[FusionReport] = None
    overlap: Optional[MissedOverlap] = None
