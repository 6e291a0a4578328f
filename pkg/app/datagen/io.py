"""CSV ingestion, scaling, chronological splits and series/noise files."""
import logging
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.core.exceptions import ConfigurationError, SeriesFormatError
from app.schemas.series import LabeledSeries

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class Normalization(str, Enum):
    NONE = "none"
    MINMAX = "minmax"


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def minmax_scale(
    values: np.ndarray, fit_range: Optional[Tuple[int, int]] = None
) -> Tuple[np.ndarray, Tuple[float, float]]:
    """Scale with min/max taken from ``values[start:stop]`` only."""
    values = np.asarray(values, dtype=np.float64)
    start, stop = fit_range if fit_range is not None else (0, len(values))
    fit = values[start:stop]
    if fit.size == 0:
        raise ConfigurationError(f"empty normalization fit range {fit_range}")
    lo, hi = float(fit.min()), float(fit.max())
    span = hi - lo if hi > lo else 1.0
    return (values - lo) / span, (lo, hi)


def load_csv(
    path: Union[str, Path],
    column: Union[str, int] = 0,
    normalization: Normalization = Normalization.NONE,
    fit_range: Optional[Tuple[int, int]] = None,
) -> LabeledSeries:
    """Read one numeric column; the header row is optional."""
    path = Path(path)
    try:
        raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise SeriesFormatError(f"{path}: file not found") from None
    except pd.errors.EmptyDataError:
        raise SeriesFormatError(f"{path}: empty file") from None
    except pd.errors.ParserError as exc:
        raise SeriesFormatError(f"{path}: malformed CSV ({exc})") from None
    if raw.empty:
        raise SeriesFormatError(f"{path}: empty file")

    first_row = [str(cell).strip() for cell in raw.iloc[0]]
    has_header = not any(_is_number(cell) for cell in first_row)
    header = first_row if has_header else None
    data = raw.iloc[1:] if has_header else raw
    first_line = 2 if has_header else 1

    if isinstance(column, int) or str(column).isdigit():
        index = int(column)
        if not 0 <= index < data.shape[1]:
            raise SeriesFormatError(f"{path}: column index {index} out of range ({data.shape[1]} columns)")
    else:
        if header is None or column not in header:
            raise SeriesFormatError(f"{path}: missing column '{column}'")
        index = header.index(column)

    cells = data.iloc[:, index].astype(str).str.strip()
    numeric = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(numeric)
    if bad.any():
        pos = int(np.argmax(bad))
        raise SeriesFormatError(
            f"{path}: non-numeric value {cells.iloc[pos]!r} at row {pos + first_line}"
        )
    if numeric.size < 2:
        raise SeriesFormatError(f"{path}: need at least 2 rows, found {numeric.size}")

    if Normalization(normalization) == Normalization.MINMAX:
        numeric, (lo, hi) = minmax_scale(numeric, fit_range)
        logger.debug("min-max scaled %s with lo=%s hi=%s", path, lo, hi)

    return LabeledSeries(name=path.stem, values=numeric.tolist())


def _slice(series: LabeledSeries, start: int, stop: int, part: str) -> LabeledSeries:
    length = stop - start
    return LabeledSeries(
        name=f"{series.name}/{part}",
        values=series.values[start:stop],
        breakpoints=[bp - start for bp in series.breakpoints if 1 <= bp - start <= length - 1],
        warmup=max(0, series.warmup - start),
    )


def split_chronological(
    series: LabeledSeries, train_frac: float, val_frac: float
) -> Tuple[LabeledSeries, LabeledSeries, LabeledSeries]:
    """Contiguous train / validation / test partition, never shuffled."""
    if not (train_frac > 0 and val_frac > 0 and train_frac + val_frac < 1):
        raise ConfigurationError(
            f"need 0 < train_frac, 0 < val_frac and train_frac + val_frac < 1, got {train_frac}, {val_frac}"
        )
    n = len(series)
    n_train = int(round(n * train_frac))
    n_val = int(round(n * val_frac))
    if n_train < 1 or n_val < 1 or n - n_train - n_val < 1:
        raise ConfigurationError(f"a {n}-sample series cannot be split {train_frac}/{val_frac}")

    cut_1, cut_2 = n_train, n_train + n_val
    return (
        _slice(series, 0, cut_1, "train"),
        _slice(series, cut_1, cut_2, "val"),
        _slice(series, cut_2, n, "test"),
    )


def write_series_csv(series: LabeledSeries, path: Union[str, Path]) -> Path:
    """Write ``index,value,is_breakpoint`` rows."""
    path = Path(path)
    breakpoints = set(series.breakpoints)
    frame = pd.DataFrame({
        "index": np.arange(len(series)),
        "value": series.array,
        "is_breakpoint": [int(i in breakpoints) for i in range(len(series))],
    })
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_breakpoints(series: LabeledSeries, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(",".join(str(bp) for bp in series.breakpoints) + "\n", encoding="utf-8")
    return path


def read_noise(path: Union[str, Path]) -> np.ndarray:
    """Pre-drawn standard normals, one per row."""
    series = load_csv(path, column=0)
    return series.array
