from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from app.schemas.detector import DetectorConfig, Zone
from app.schemas.series import SegmentedProcessSpec


class GenerateRequest(BaseModel):
    """Schema for generating a series from a preset or a full spec."""
    process: Optional[str] = None
    seed: int = Field(0, ge=0)
    alpha: Optional[float] = None
    spec: Optional[SegmentedProcessSpec] = None


class PresetListResponse(BaseModel):
    presets: List[str]


class OutcomeResponse(BaseModel):
    """One detector step, as sent over HTTP and Socket.IO."""
    t: int
    ns: bool
    zone: Zone
    Z: float
    sma: float
    sigma: float
    deviation: float
    d: float


class DetectRequest(BaseModel):
    """Schema for running the detector over a posted series."""
    values: List[float] = Field(..., min_length=1)
    config: DetectorConfig = Field(default_factory=DetectorConfig)
    breakpoints: Optional[List[int]] = None
    include_outcomes: bool = True

    @field_validator("breakpoints")
    @classmethod
    def validate_breakpoints(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("breakpoints must be sorted")
        return v


class ScoreResponse(BaseModel):
    tp: int
    fp: int
    tn: int
    fn: int
    delays: List[int]
    rates: Dict[str, Optional[float]]


class DetectResponse(BaseModel):
    """Schema for detector results."""
    length: int
    flagged: List[int]
    outcomes: List[OutcomeResponse] = Field(default_factory=list)
    score: Optional[ScoreResponse] = None


class TrialResultResponse(BaseModel):
    trial_index: int
    seed: int
    metrics: Dict

    class Config:
        from_attributes = True


class RunResponse(BaseModel):
    """Schema for a registry entry."""
    id: int
    command: str
    name: str
    output_dir: str
    status: str
    manifest_sha256: Optional[str] = None
    created_at: datetime

    class Config:
        from_attributes = True


class RunDetailResponse(RunResponse):
    config: Dict
    trials: List[TrialResultResponse]


class RunListResponse(BaseModel):
    runs: List[RunResponse]
    total: int
