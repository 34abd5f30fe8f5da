"""
Synthetic fingertip database: generation, subject-disjoint splitting and
on-disk layout.

Bona fide presentations are sinusoidal ridge patterns whose frequency,
orientation, curvature and phase are fixed per subject. SWIR renders four
wavelengths that get darker with channel index; laser renders three frames
under a radial focus spot that drifts slightly between frames. Attacks
render a species' material, either replacing the finger or blended over it.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ocpad.errors import DataContractError, UsageError
from ocpad.models.sample_set import ATTACK, BONAFIDE, SampleSet
from ocpad.schemas.dataset import MODALITY_CHANNELS, DatasetConfig, Modality, SpeciesSpec, default_species
from ocpad.schemas.report import Manifest
from ocpad.utils.container import file_checksum, save_container
from ocpad.utils.seeding import rng_for

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")
DEFAULT_FRACTIONS = (0.3, 0.2, 0.5)

# Skin reflectance under SWIR falls with wavelength.
SWIR_BASE = [0.75 - 0.12 * c for c in range(MODALITY_CHANNELS["swir"])]
LASER_BASE = 0.8
LASER_DRIFT = 0.6
RIDGE_DEPTH = 0.12

__all__ = ["generate", "generate_modalities", "default_species", "split_by_subject",
           "write_dataset", "container_name", "SPLITS"]


@dataclass(frozen=True)
class Presentation:
    sample_id: str
    subject_id: str
    label: str
    species: Optional[SpeciesSpec]


@dataclass(frozen=True)
class Ridges:
    frequency: float
    orientation: float
    curvature: float
    phase: float


def _presentations(config: DatasetConfig) -> List[Presentation]:
    items = [Presentation(f"b{i:05d}", f"s{i % config.subjects:03d}", BONAFIDE, None)
             for i in range(config.bonafide)]
    index = 0
    for spec, count in zip(config.species, config.counts()):
        for _ in range(count):
            items.append(Presentation(f"p{index:05d}", f"a{index % config.attack_subjects:03d}", ATTACK, spec))
            index += 1
    return items


def _subject_ridges(seed: int, subject_id: str) -> Ridges:
    rng = rng_for(seed, f"subject:{subject_id}")
    return Ridges(
        frequency=float(rng.uniform(0.12, 0.2)),
        orientation=float(rng.uniform(0.0, math.pi)),
        curvature=float(rng.uniform(-0.004, 0.004)),
        phase=float(rng.uniform(0.0, 2 * math.pi)),
    )


def _ridge_map(ridges: Ridges, height: int, width: int, shift: Tuple[float, float]) -> np.ndarray:
    """Ridge intensity in [0, 1]."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    yy -= height / 2 + shift[0]
    xx -= width / 2 + shift[1]
    along = xx * math.cos(ridges.orientation) + yy * math.sin(ridges.orientation)
    field = 2 * math.pi * ridges.frequency * along + ridges.curvature * (xx ** 2 + yy ** 2) + ridges.phase
    return 0.5 + 0.5 * np.sin(field)


def _vignette(height: int, width: int, frame: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cy = (height - 1) / 2
    cx = (width - 1) / 2 + LASER_DRIFT * (frame - 1)
    radius = np.hypot((yy - cy) / max(height, 1), (xx - cx) / max(width, 1))
    return np.exp(-(radius ** 2) / (2 * 0.35 ** 2))


def _render(ridge: np.ndarray, modality: Modality, multipliers: Sequence[float], contrast: float) -> np.ndarray:
    """
    Noise-free stack for one surface.
    """
    height, width = ridge.shape
    channels = MODALITY_CHANNELS[modality]
    texture = 1 - RIDGE_DEPTH + RIDGE_DEPTH * contrast * ridge
    out = np.empty((channels, height, width))
    for c in range(channels):
        if modality == "swir":
            base = SWIR_BASE[c]
        else:
            base = LASER_BASE * _vignette(height, width, c)
        out[c] = base * multipliers[c] * texture
    return out


def _render_presentation(item: Presentation, config: DatasetConfig, modality: Modality) -> np.ndarray:
    # Geometry draws are shared across modalities; noise draws are not.
    geometry = rng_for(config.seed, f"geometry:{item.sample_id}")
    shift = (float(geometry.uniform(-2, 2)), float(geometry.uniform(-2, 2)))
    frequency_draw, orientation_draw = geometry.uniform(-1, 1, size=2)
    noise = rng_for(config.seed, f"noise:{modality}:{item.sample_id}")

    subject = _subject_ridges(config.seed, item.subject_id)
    skin = _render(_ridge_map(subject, config.height, config.width, shift), modality,
                   [1.0] * MODALITY_CHANNELS[modality], 1.0)
    image = skin
    sigma = config.noise
    spec = item.species
    if spec is not None:
        material_ridges = Ridges(
            frequency=subject.frequency * (1 + spec.frequency_jitter * frequency_draw),
            orientation=subject.orientation + spec.orientation_jitter * orientation_draw,
            curvature=subject.curvature,
            phase=subject.phase,
        )
        material = _render(_ridge_map(material_ridges, config.height, config.width, shift), modality,
                           spec.multipliers(modality), spec.ridge_contrast)
        image = material if spec.coverage == "full" else spec.opacity * material + (1 - spec.opacity) * skin
        sigma = math.hypot(sigma, spec.noise)
    image = image + noise.normal(0.0, sigma, size=image.shape)
    return np.clip(image, 0.0, 1.0).astype(np.float32)


def generate(config: DatasetConfig, modality: Modality = "swir", jobs: int = 1) -> SampleSet:
    """
    Render the configured database for one capture modality.
    """
    return generate_modalities(config, [modality], jobs)[modality]


def generate_modalities(config: DatasetConfig, modalities: Iterable[Modality] = ("swir", "laser"),
                        jobs: int = 1) -> Dict[Modality, SampleSet]:
    """
    Render the same presentations once per modality.
    """
    if config.subjects < 1:
        raise DataContractError("at least one subject is required")
    items = _presentations(config)
    sets = {}
    for modality in modalities:
        if modality not in MODALITY_CHANNELS:
            raise UsageError(f"unknown modality {modality!r}")
        render = partial(_render_presentation, config=config, modality=modality)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                images = list(pool.map(render, items))
        else:
            images = [render(item) for item in items]
        channels = MODALITY_CHANNELS[modality]
        stack = np.stack(images) if images else np.zeros((0, channels, config.height, config.width), np.float32)
        sets[modality] = SampleSet(
            images=stack,
            sample_ids=[i.sample_id for i in items],
            subject_ids=[i.subject_id for i in items],
            labels=[i.label for i in items],
            species=[i.species.name if i.species else BONAFIDE for i in items],
        )
        logger.info(f"Generated {len(items)} {modality} samples "
                    f"({config.bonafide} bona fide, {len(items) - config.bonafide} attacks)")
    return sets


def _partition_sizes(n: int, fractions: Sequence[float]) -> Tuple[int, int, int]:
    n_train = max(1, math.floor(fractions[0] * n + 1e-9))
    n_val = max(1, math.floor(fractions[1] * n + 1e-9))
    if n_train + n_val >= n:
        raise DataContractError(f"{n} bona fide subjects cannot fill three partitions")
    return n_train, n_val, n - n_train - n_val


def split_subjects(samples: SampleSet, fractions: Sequence[float] = DEFAULT_FRACTIONS,
                   seed: int = 42) -> Tuple[List[str], List[str], List[str]]:
    """
    Subject ids per partition. Subjects with any attack sample go to test.
    """
    if len(fractions) != 3 or min(fractions) < 0 or abs(sum(fractions) - 1.0) > 1e-9:
        raise UsageError(f"split fractions must be three non-negative values summing to 1, got {list(fractions)}")
    attack_subjects = {s for s, label in zip(samples.subject_ids, samples.labels) if label == ATTACK}
    candidates = sorted({s for s in samples.subject_ids} - attack_subjects)
    if len(candidates) < 3:
        raise DataContractError(f"need at least 3 bona fide subjects to split, got {len(candidates)}")
    n_train, n_val, _ = _partition_sizes(len(candidates), fractions)
    order = rng_for(seed, "split").permutation(len(candidates))
    shuffled = [candidates[i] for i in order]
    train = sorted(shuffled[:n_train])
    val = sorted(shuffled[n_train:n_train + n_val])
    test = sorted(shuffled[n_train + n_val:] + sorted(attack_subjects))
    return train, val, test


def split_by_subject(samples: SampleSet, fractions: Sequence[float] = DEFAULT_FRACTIONS,
                     seed: int = 42) -> Tuple[SampleSet, SampleSet, SampleSet]:
    """
    Subject-disjoint (train, validation, test); train and validation are bona fide only.
    """
    train, val, _ = split_subjects(samples, fractions, seed)
    train, val = set(train), set(val)
    in_train = np.array([s in train for s in samples.subject_ids], dtype=bool)
    in_val = np.array([s in val for s in samples.subject_ids], dtype=bool)
    parts = (samples.subset(in_train), samples.subset(in_val), samples.subset(~(in_train | in_val)))
    logger.info(f"Split {len(samples.subjects())} subjects into "
                f"{len(train)}/{len(val)}/{len(samples.subjects()) - len(train) - len(val)} "
                f"({len(parts[0])}/{len(parts[1])}/{len(parts[2])} samples)")
    return parts


def container_name(split: str, modality: Modality) -> str:
    return f"{split}_{modality}.ocpd"


def write_dataset(config: DatasetConfig, out_dir: Union[str, Path],
                  modalities: Sequence[Modality] = ("swir", "laser"),
                  fractions: Sequence[float] = DEFAULT_FRACTIONS, jobs: int = 1) -> Manifest:
    """
    Generate, split and write one container per (split, modality) plus manifest.json.
    """
    out_dir = Path(out_dir)
    sets = generate_modalities(config, modalities, jobs)
    files, counts, subjects, checksums = {}, {}, {}, {}
    for modality, samples in sets.items():
        for split, part in zip(SPLITS, split_by_subject(samples, fractions, config.seed)):
            name = container_name(split, modality)
            path = save_container(part, out_dir / name)
            files[f"{split}_{modality}"] = name
            checksums[name] = file_checksum(path)
            counts[split] = part.species_counts()
            subjects[split] = len(part.subjects())
    manifest = Manifest(
        seed=config.seed, height=config.height, width=config.width, modalities=list(sets),
        files=files, counts=counts, subjects=subjects, checksums=checksums,
        generated_at=datetime.now(timezone.utc).isoformat(),
    )
    (out_dir / "manifest.json").write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(files)} containers and manifest to {out_dir}")
    return manifest
