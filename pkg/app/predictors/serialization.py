"""Versioned ``.npz`` snapshots: arrays plus a JSON header with hyper-parameters and seeds."""
import json
import logging
from pathlib import Path
from typing import Union

import numpy as np

from app.core.exceptions import ConfigurationError
from app.predictors.base import OnlinePredictor, PredictorSnapshot
from app.schemas.predictor import PredictorKind

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_HEADER_KEY = "__header__"


def save_snapshot(snapshot: PredictorSnapshot, path: Union[str, Path]) -> Path:
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(".npz")
    header = {
        "format_version": FORMAT_VERSION,
        "kind": PredictorKind(snapshot.kind).value,
        "input_dim": snapshot.input_dim,
        "config": snapshot.config,
        "state": snapshot.state,
        "arrays": sorted(snapshot.arrays),
    }
    arrays = {f"a_{i}": snapshot.arrays[name] for i, name in enumerate(header["arrays"])}
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        np.savez(fh, **{_HEADER_KEY: np.array(json.dumps(header, sort_keys=True))}, **arrays)
    logger.debug("Saved %s snapshot to %s", header["kind"], path)
    return path


def load_snapshot(path: Union[str, Path]) -> PredictorSnapshot:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"snapshot file not found: {path}")
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data[_HEADER_KEY]))
        if header.get("format_version") != FORMAT_VERSION:
            raise ConfigurationError(
                f"{path}: snapshot format {header.get('format_version')} is not {FORMAT_VERSION}"
            )
        arrays = {name: data[f"a_{i}"].copy() for i, name in enumerate(header["arrays"])}
    return PredictorSnapshot(
        kind=PredictorKind(header["kind"]),
        input_dim=int(header["input_dim"]),
        config=header["config"],
        arrays=arrays,
        state=header["state"],
    )


def save_predictor(predictor: OnlinePredictor, path: Union[str, Path]) -> Path:
    return save_snapshot(predictor.snapshot(), path)


def load_predictor(path: Union[str, Path]) -> OnlinePredictor:
    from app.predictors.factory import predictor_from_snapshot

    return predictor_from_snapshot(load_snapshot(path))
