import tempfile
from pathlib import Path
from typing import List, Optional

from fastapi import APIRouter, File, HTTPException, Query, UploadFile, status

from app.core.exceptions import ConfigurationError, FeatureError, StreamPoisonedError
from app.datagen import load_csv
from app.detector import SafeDetector, flagged_indices
from app.evaluation import match_detections, rates
from app.schemas.api import DetectRequest, DetectResponse, OutcomeResponse, ScoreResponse
from app.schemas.detector import DetectorConfig, DistanceKind, FeatureKind

router = APIRouter(prefix="/api/detect", tags=["Detection"])

MAX_UPLOAD_SIZE = 10 * 1024 * 1024  # 10 MB


def outcome_to_response(outcome) -> OutcomeResponse:
    """Convert a DetectionOutcome to OutcomeResponse."""
    return OutcomeResponse(
        t=outcome.t, ns=outcome.ns, zone=outcome.zone, Z=outcome.Z, sma=outcome.sma,
        sigma=outcome.sigma, deviation=outcome.deviation, d=outcome.d,
    )


def run_detection(
    values: List[float],
    config: DetectorConfig,
    breakpoints: Optional[List[int]] = None,
    include_outcomes: bool = True,
) -> DetectResponse:
    """Stream ``values`` through a fresh detector and score against breakpoints if given."""
    try:
        outcomes = SafeDetector(config).run(values)
        flagged = flagged_indices(outcomes)
        score = None
        if breakpoints is not None:
            matched = match_detections(flagged, breakpoints, len(values), warmup=config.warmup)
            score = ScoreResponse(
                tp=matched.tp, fp=matched.fp, tn=matched.tn, fn=matched.fn,
                delays=matched.delays, rates=rates(matched),
            )
    except StreamPoisonedError as exc:
        raise HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(exc))
    except (ConfigurationError, FeatureError, ValueError) as exc:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))

    return DetectResponse(
        length=len(values),
        flagged=flagged,
        outcomes=[outcome_to_response(o) for o in outcomes] if include_outcomes else [],
        score=score,
    )


@router.post("", response_model=DetectResponse)
async def detect(request: DetectRequest):
    """Run the detector over a posted series."""
    return run_detection(request.values, request.config, request.breakpoints, request.include_outcomes)


@router.post("/upload", response_model=DetectResponse)
async def detect_upload(
    file: UploadFile = File(...),
    column: str = Query("0"),
    distance: DistanceKind = Query(DistanceKind.EUCLIDEAN),
    feature_kind: FeatureKind = Query(FeatureKind.SPECTRAL_ENERGY),
    breakpoints: Optional[str] = Query(None, description="Comma-separated ground truth"),
    include_outcomes: bool = Query(False),
):
    """Run the detector over one column of an uploaded CSV file."""
    content = await file.read()
    if len(content) > MAX_UPLOAD_SIZE:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"File size exceeds maximum allowed ({MAX_UPLOAD_SIZE // (1024 * 1024)} MB)"
        )

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / (Path(file.filename or "upload.csv").name or "upload.csv")
        path.write_bytes(content)
        try:
            series = load_csv(path, column=column)
        except ConfigurationError as exc:
            raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))

    truth = None
    if breakpoints:
        try:
            truth = [int(b) for b in breakpoints.split(",") if b.strip()]
        except ValueError:
            raise HTTPException(
                status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                detail="breakpoints must be comma-separated integers"
            )
    config = DetectorConfig.defaults_for(distance, feature_kind)
    return run_detection(series.values, config, truth, include_outcomes)
