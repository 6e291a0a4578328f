"""SVG figures drawn from run artifacts; nothing here feeds back into results."""
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path).with_suffix(".svg")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def plot_detection_trace(trace: pd.DataFrame, breakpoints: Sequence[int], path: Union[str, Path]) -> Path:
    """Series with flags and breakpoints on top, EWMA against SMA below."""
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    index = trace["t"] - 1
    top.plot(index, trace["x"], linewidth=0.7, color="tab:blue")
    for bp in breakpoints:
        top.axvline(bp, color="black", linestyle="--", linewidth=0.8)
    flagged = trace[trace["ns"] == 1]
    top.scatter(flagged["t"] - 1, flagged["x"], color="tab:red", s=14, zorder=3, label="flag")
    top.set_ylabel("x")
    top.legend(loc="upper left")

    bottom.plot(index, trace["Z"], label="EWMA", color="tab:orange")
    bottom.plot(index, trace["sma"], label="SMA", color="tab:green")
    bottom.set_xlabel("sample")
    bottom.set_ylabel("distance")
    bottom.legend(loc="upper left")
    return _save(fig, path)


def plot_prediction(
    targets: np.ndarray,
    predictions: np.ndarray,
    baseline: np.ndarray,
    adaptive_mse: np.ndarray,
    baseline_mse: np.ndarray,
    path: Union[str, Path],
    offset: int = 0,
) -> Path:
    """Targets against both predictors, then their running MSE."""
    index = np.arange(offset, offset + len(targets))
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    top.plot(index, targets, linewidth=0.6, color="black", label="actual")
    top.plot(index, baseline, linewidth=0.6, color="tab:gray", label="baseline")
    top.plot(index, predictions, linewidth=0.6, color="tab:red", label="adapted")
    top.legend(loc="upper left")

    bottom.plot(index, baseline_mse, color="tab:gray", label="baseline")
    bottom.plot(index, adaptive_mse, color="tab:red", label="adapted")
    bottom.set_xlabel("sample")
    bottom.set_ylabel("running MSE")
    bottom.legend(loc="upper left")
    return _save(fig, path)


def plot_feature_evolution(
    values: Sequence[float], features: np.ndarray, path: Union[str, Path],
    breakpoints: Optional[Sequence[int]] = None,
) -> Path:
    """Series above a heat map of its per-arrival features."""
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    top.plot(np.arange(len(values)), values, linewidth=0.7)
    for bp in breakpoints or []:
        top.axvline(bp, color="black", linestyle="--", linewidth=0.8)
    image = bottom.imshow(
        np.asarray(features).T, aspect="auto", origin="lower", interpolation="nearest",
        extent=(0, len(values), -0.5, features.shape[1] - 0.5),
    )
    fig.colorbar(image, ax=bottom, label="feature value")
    bottom.set_xlabel("sample")
    bottom.set_ylabel("feature")
    return _save(fig, path)
