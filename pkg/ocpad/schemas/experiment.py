from typing import List, Optional

from pydantic import BaseModel, Field

from ocpad.schemas.architecture import AEArchitecture, ArchitectureKind
from ocpad.schemas.dataset import MODALITY_CHANNELS, DatasetConfig, Modality
from ocpad.schemas.loss import LossConfig, LossKind
from ocpad.schemas.training import TrainingConfig


class ExperimentConfig(BaseModel):
    """
    Every knob of a run, flat so it maps one-to-one onto the
    ``key = value`` config file. Field order is the file order.
    """

    seed: int = 42
    data_dir: str = "data"
    output_dir: str = "runs"

    # dataset
    height: int = Field(default=32, ge=1, le=65535)
    width: int = Field(default=96, ge=1, le=65535)
    subjects: int = Field(default=50, ge=1)
    bonafide: int = Field(default=1000, ge=0)
    attacks_per_species: int = Field(default=100, ge=0)
    attack_subjects: int = Field(default=20, ge=1)
    noise: float = Field(default=0.02, ge=0.0)
    modality: Modality = "swir"
    modalities: List[Modality] = Field(default_factory=lambda: ["swir", "laser"])

    # architecture
    arch: ArchitectureKind = "dense_ae"
    filters: int = Field(default=12, ge=1)
    latent: int = Field(default=64, ge=1)
    kernel: int = Field(default=3, ge=1)

    # loss
    loss: LossKind = "mse"
    c: float = Field(default=1.8, ge=0.0)
    alpha: float = Field(default=0.9, gt=0.0, le=1.0)
    c_values: List[float] = Field(default_factory=lambda: [1.0, 1.4, 1.8, 2.0, 2.2])

    # optimizer
    lr: float = Field(default=1e-3, gt=0.0)
    rho: float = Field(default=0.9, gt=0.0, lt=1.0)
    eps: float = Field(default=1e-7, gt=0.0)
    batch_size: int = Field(default=32, ge=1)
    epochs: int = Field(default=20, ge=0)

    # baselines
    gmm_components: int = Field(default=4, ge=1)
    gmm_max_iter: int = Field(default=200, ge=1)
    gmm_tol: float = Field(default=1e-6, ge=0.0)
    svm_nu: float = Field(default=0.1, gt=0.0, le=1.0)
    svm_gamma: Optional[float] = Field(default=None, gt=0.0)
    # Validation sweeps used when select_baselines is on
    select_baselines: bool = True
    gmm_component_grid: List[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    svm_gamma_factors: List[float] = Field(default_factory=lambda: [0.1, 0.3, 1.0, 3.0, 10.0])

    # evaluation
    fusion_steps: int = Field(default=10, ge=1)

    def dataset(self) -> DatasetConfig:
        return DatasetConfig(
            seed=self.seed, height=self.height, width=self.width, subjects=self.subjects,
            bonafide=self.bonafide, attacks_per_species=self.attacks_per_species,
            attack_subjects=self.attack_subjects, noise=self.noise,
        )

    def architecture(self, modality: Optional[Modality] = None,
                     kind: Optional[ArchitectureKind] = None) -> AEArchitecture:
        return AEArchitecture(
            kind=kind or self.arch, channels=MODALITY_CHANNELS[modality or self.modality],
            height=self.height, width=self.width, filters=self.filters,
            latent=self.latent, kernel=self.kernel,
        )

    def loss_config(self, kind: Optional[LossKind] = None, c: Optional[float] = None) -> LossConfig:
        return LossConfig(kind=kind or self.loss, c=self.c if c is None else c, alpha=self.alpha)

    def training(self) -> TrainingConfig:
        return TrainingConfig(epochs=self.epochs, batch_size=self.batch_size, lr=self.lr,
                              rho=self.rho, eps=self.eps, seed=self.seed)

    def fusion_weights(self) -> List[float]:
        return [round(i / self.fusion_steps, 10) for i in range(self.fusion_steps + 1)]
