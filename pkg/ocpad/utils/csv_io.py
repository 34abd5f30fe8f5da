"""
CSV codecs for scores, features, DET curves and loss traces.

Floats are written with 17 significant digits and read back with pandas'
round-trip parser, so a write/read cycle is bit-exact.
"""

import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ocpad.errors import DataContractError, FormatError
from ocpad.models.score_set import DetCurve, ScoreSet

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
ID_COLUMNS = ["sample_id", "label", "species"]
PathLike = Union[str, Path]


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def _read(path: PathLike, required: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DataContractError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={c: str for c in ID_COLUMNS}, keep_default_na=False,
                            na_values={}, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise FormatError(f"{path}: missing columns {missing}")
    return frame


def _floats(frame: pd.DataFrame, columns: Sequence[str], path: PathLike) -> np.ndarray:
    try:
        return frame[list(columns)].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: non-numeric values in {list(columns)}") from exc


# Scores

def write_scores(scores: ScoreSet, path: PathLike) -> Path:
    frame = pd.DataFrame({"sample_id": scores.sample_ids, "label": scores.labels,
                          "species": scores.species, "score": scores.scores})
    return _write(frame, path)


def read_scores(path: PathLike) -> ScoreSet:
    frame = _read(path, ID_COLUMNS + ["score"])
    return ScoreSet(sample_ids=frame["sample_id"].tolist(), labels=frame["label"].tolist(),
                    species=frame["species"].tolist(), scores=_floats(frame, ["score"], path)[:, 0])


# Features

def feature_columns(dim: int) -> List[str]:
    return [f"f{i}" for i in range(dim)]


def write_features(sample_ids: Sequence[str], labels: Sequence[str], species: Sequence[str],
                   features: np.ndarray, path: PathLike) -> Path:
    features = np.asarray(features, dtype=np.float64)
    frame = pd.DataFrame(features, columns=feature_columns(features.shape[1]))
    frame.insert(0, "species", list(species))
    frame.insert(0, "label", list(labels))
    frame.insert(0, "sample_id", list(sample_ids))
    return _write(frame, path)


def read_features(path: PathLike) -> Tuple[ScoreSet, np.ndarray]:
    """
    Feature rows as (records with zero scores, (n, D) matrix).
    """
    frame = _read(path, ID_COLUMNS)
    columns = [c for c in frame.columns if c not in ID_COLUMNS]
    if not columns or columns != feature_columns(len(columns)):
        raise FormatError(f"{path}: feature columns must be f0..f{{D-1}}, got {columns[:5]}")
    features = _floats(frame, columns, path)
    records = ScoreSet(sample_ids=frame["sample_id"].tolist(), labels=frame["label"].tolist(),
                       species=frame["species"].tolist(), scores=np.zeros(len(frame)))
    return records, features


# DET curves and traces

def write_det(curve: DetCurve, path: PathLike) -> Path:
    frame = pd.DataFrame({"threshold": curve.thresholds, "apcer": curve.apcer, "bpcer": curve.bpcer})
    return _write(frame, path)


def read_det(path: PathLike) -> DetCurve:
    frame = _read(path, ["threshold", "apcer", "bpcer"])
    values = _floats(frame, ["threshold", "apcer", "bpcer"], path)
    return DetCurve(thresholds=values[:, 0], apcer=values[:, 1], bpcer=values[:, 2])


def write_loss_trace(train_losses: Sequence[float], val_losses: Sequence[float], path: PathLike) -> Path:
    """
    Row 0 is the untrained model (no train loss); row e follows epoch e.
    """
    frame = pd.DataFrame({
        "epoch": np.arange(len(val_losses)),
        "train_loss": [np.nan] + list(train_losses),
        "val_loss": list(val_losses),
    })
    return _write(frame, path)
