import json

from fastapi import APIRouter, Depends, HTTPException, Query, status
from sqlalchemy.orm import Session

from app.database import get_db
from app.models.run import ExperimentRun
from app.schemas.api import RunDetailResponse, RunListResponse, RunResponse, TrialResultResponse

router = APIRouter(prefix="/api/runs", tags=["Runs"])


def run_to_response(run: ExperimentRun) -> RunResponse:
    """Convert ExperimentRun model to RunResponse."""
    return RunResponse(
        id=run.id,
        command=run.command,
        name=run.name,
        output_dir=run.output_dir,
        status=run.status.value,
        manifest_sha256=run.manifest_sha256,
        created_at=run.created_at,
    )


@router.get("", response_model=RunListResponse)
async def list_runs(
    command: str = Query(None, description="Only runs of this subcommand"),
    page: int = Query(1, ge=1),
    page_size: int = Query(50, ge=1, le=500),
    db: Session = Depends(get_db),
):
    """Registry of harness runs, newest first."""
    query = db.query(ExperimentRun)
    if command:
        query = query.filter(ExperimentRun.command == command)
    total = query.count()
    runs = (
        query.order_by(ExperimentRun.id.desc())
        .offset((page - 1) * page_size)
        .limit(page_size)
        .all()
    )
    return RunListResponse(runs=[run_to_response(r) for r in runs], total=total)


@router.get("/{run_id}", response_model=RunDetailResponse)
async def get_run(run_id: int, db: Session = Depends(get_db)):
    """One run with its config echo and per-trial metrics."""
    run = db.query(ExperimentRun).filter(ExperimentRun.id == run_id).first()
    if not run:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail="Run not found"
        )
    return RunDetailResponse(
        **run_to_response(run).model_dump(),
        config=json.loads(run.config_json),
        trials=[
            TrialResultResponse(trial_index=t.trial_index, seed=t.seed, metrics=json.loads(t.metrics_json))
            for t in run.trials
        ],
    )
