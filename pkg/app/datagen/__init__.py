from app.datagen.io import (
    Normalization,
    load_csv,
    minmax_scale,
    read_noise,
    split_chronological,
    write_breakpoints,
    write_series_csv,
)
from app.datagen.presets import PROCESS_PRESETS, TS_A_ALPHAS, build_preset
from app.datagen.processes import generate, standard_normal_stream

__all__ = [
    "generate",
    "standard_normal_stream",
    "build_preset",
    "PROCESS_PRESETS",
    "TS_A_ALPHAS",
    "Normalization",
    "load_csv",
    "minmax_scale",
    "read_noise",
    "split_chronological",
    "write_series_csv",
    "write_breakpoints",
]
