import numpy as np
import pytest

from ocpad.models.sample_set import ATTACK, BONAFIDE, SampleSet
from ocpad.models.score_set import ScoreSet
from ocpad.schemas.architecture import AEArchitecture
from ocpad.schemas.dataset import DatasetConfig
from ocpad.services.dataset import generate, split_by_subject


def make_scores(bonafide, attack, species=None) -> ScoreSet:
    """ScoreSet from two score lists; attacks default to one species."""
    bonafide, attack = list(bonafide), list(attack)
    species = list(species) if species is not None else ["fakefinger"] * len(attack)
    return ScoreSet(
        sample_ids=[f"b{i}" for i in range(len(bonafide))] + [f"p{i}" for i in range(len(attack))],
        labels=[BONAFIDE] * len(bonafide) + [ATTACK] * len(attack),
        species=[BONAFIDE] * len(bonafide) + species,
        scores=np.array(bonafide + attack, dtype=np.float64),
    )


def make_samples(n: int, channels: int = 4, height: int = 6, width: int = 10, seed: int = 0,
                 attacks: int = 0) -> SampleSet:
    rng = np.random.default_rng(seed)
    labels = [BONAFIDE] * (n - attacks) + [ATTACK] * attacks
    return SampleSet(
        images=rng.uniform(0, 1, size=(n, channels, height, width)).astype(np.float32),
        sample_ids=[f"x{i:04d}" for i in range(n)],
        subject_ids=[f"s{i % 5:03d}" for i in range(n)],
        labels=labels,
        species=[BONAFIDE if label == BONAFIDE else "fakefinger" for label in labels],
    )


@pytest.fixture
def tiny_config() -> DatasetConfig:
    return DatasetConfig(seed=42, height=8, width=12, subjects=6, bonafide=36,
                         attacks_per_species=4, attack_subjects=2)


@pytest.fixture
def tiny_swir(tiny_config) -> SampleSet:
    return generate(tiny_config, "swir")


@pytest.fixture
def tiny_splits(tiny_swir):
    return split_by_subject(tiny_swir, seed=42)


@pytest.fixture
def tiny_arch() -> AEArchitecture:
    return AEArchitecture(kind="dense_ae", channels=4, height=8, width=12, filters=2, latent=8)


def numeric_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of a scalar function, in place over x."""
    grad = np.zeros_like(x)
    flat, out = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        plus = f()
        flat[i] = old - h
        minus = f()
        flat[i] = old
        out[i] = (plus - minus) / (2 * h)
    return grad


def assert_gradients_close(analytic: np.ndarray, numeric: np.ndarray, rtol: float = 1e-4, floor: float = 1e-6):
    """Relative error below rtol, or absolute error below floor for near-zero entries."""
    error = np.abs(analytic - numeric)
    allowed = np.maximum(rtol * (np.abs(analytic) + np.abs(numeric)), floor)
    worst = float((error / allowed).max()) if error.size else 0.0
    assert worst <= 1.0, f"gradient mismatch: worst error is {worst:.2f}x the allowance"
