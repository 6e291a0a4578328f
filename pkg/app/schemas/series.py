import math
from enum import Enum
from typing import List

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import settings


class ModelKind(str, Enum):
    """Recursion family of one stationary segment."""
    AR = "AR"
    ARMA = "ARMA"
    NL1 = "NL1"
    NL2 = "NL2"


class SegmentSpec(BaseModel):
    """One stationary regime of a piecewise process."""
    model_kind: ModelKind = ModelKind.AR
    ar_coeffs: List[float] = Field(..., min_length=1)
    ma_coeffs: List[float] = Field(default_factory=list)
    noise_std: float = Field(..., ge=0)
    end_index: int = Field(..., gt=0)
    # Deterministic additive level: level + slope * (samples since segment start)
    level: float = 0.0
    slope: float = 0.0

    @field_validator("noise_std")
    @classmethod
    def validate_noise_std(cls, v: float) -> float:
        if v == 0 and not settings.ALLOW_ZERO_NOISE:
            raise ValueError("noise_std must be positive")
        return v

    @model_validator(mode="after")
    def validate_arity(self) -> "SegmentSpec":
        if self.model_kind in (ModelKind.NL1, ModelKind.NL2):
            if len(self.ar_coeffs) != 4:
                raise ValueError(
                    f"{self.model_kind.value} segments need exactly 4 ar_coeffs, got {len(self.ar_coeffs)}"
                )
            if self.ma_coeffs:
                raise ValueError(f"{self.model_kind.value} segments take no ma_coeffs")
        elif self.model_kind == ModelKind.AR and self.ma_coeffs:
            raise ValueError("AR segments take no ma_coeffs; use ARMA")
        return self

    @property
    def max_lag(self) -> int:
        return max(len(self.ar_coeffs), len(self.ma_coeffs))


class SegmentedProcessSpec(BaseModel):
    """Declarative description of a piecewise-stationary generating process."""
    name: str = "custom"
    segments: List[SegmentSpec] = Field(..., min_length=1)
    total_length: int = Field(..., gt=0)
    seed: int = Field(0, ge=0, le=2**64 - 1)

    @model_validator(mode="after")
    def validate_boundaries(self) -> "SegmentedProcessSpec":
        ends = [s.end_index for s in self.segments]
        for prev, cur in zip(ends, ends[1:]):
            if cur <= prev:
                raise ValueError(f"end_index must strictly increase, got {prev} then {cur}")
        if ends[-1] != self.total_length:
            raise ValueError(
                f"last segment end_index ({ends[-1]}) must equal total_length ({self.total_length})"
            )
        return self

    @property
    def breakpoints(self) -> List[int]:
        return [s.end_index for s in self.segments[:-1]]

    @property
    def max_lag(self) -> int:
        return max(s.max_lag for s in self.segments)


class LabeledSeries(BaseModel):
    """A univariate series with its ground-truth change points."""
    name: str = "series"
    values: List[float]
    breakpoints: List[int] = Field(default_factory=list)
    # Leading samples produced from zero initial conditions
    warmup: int = Field(0, ge=0)

    @field_validator("values")
    @classmethod
    def validate_finite(cls, v: List[float]) -> List[float]:
        for i, value in enumerate(v):
            if not math.isfinite(value):
                raise ValueError(f"non-finite value at index {i}")
        return v

    @model_validator(mode="after")
    def validate_breakpoints(self) -> "LabeledSeries":
        n = len(self.values)
        for bp in self.breakpoints:
            if not 1 <= bp <= n - 1:
                raise ValueError(f"breakpoint {bp} outside [1, {n - 1}]")
        if sorted(set(self.breakpoints)) != list(self.breakpoints):
            raise ValueError("breakpoints must be strictly increasing")
        return self

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)
