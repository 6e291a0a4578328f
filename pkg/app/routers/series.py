from fastapi import APIRouter, HTTPException, status

from app.core.exceptions import ConfigurationError
from app.datagen import PROCESS_PRESETS, build_preset, generate
from app.schemas.api import GenerateRequest, PresetListResponse
from app.schemas.series import LabeledSeries

router = APIRouter(prefix="/api/series", tags=["Series"])


@router.get("/presets", response_model=PresetListResponse)
async def list_presets():
    """Names of the built-in processes."""
    return PresetListResponse(presets=sorted(PROCESS_PRESETS))


@router.post("/generate", response_model=LabeledSeries)
async def generate_series(request: GenerateRequest):
    """Generate a labeled series from a preset name or a full spec."""
    if (request.process is None) == (request.spec is None):
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail="Provide exactly one of 'process' or 'spec'"
        )
    try:
        if request.spec is not None:
            spec = request.spec.model_copy(update={"seed": request.seed})
        else:
            spec = build_preset(request.process, seed=request.seed, alpha=request.alpha)
        return generate(spec)
    except ConfigurationError as exc:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
