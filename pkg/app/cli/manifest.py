"""Run manifests (config echo, seeds, artifact hashes) and the run registry."""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from sqlalchemy.exc import SQLAlchemyError

from app.core.config import settings
from app.core.exceptions import ConfigurationError
from app.database import SessionLocal, init_db
from app.models import ExperimentRun, RunStatus, TrialResult

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def prepare_output_dir(path: Path, schema_version: Optional[int] = None) -> Path:
    """Create ``path``; refuse a directory written under another CSV schema version."""
    schema_version = settings.CSV_SCHEMA_VERSION if schema_version is None else schema_version
    path = Path(path)
    manifest = path / MANIFEST_NAME
    if manifest.exists():
        try:
            existing = json.loads(manifest.read_text(encoding="utf-8")).get("schema_version")
        except json.JSONDecodeError:
            raise ConfigurationError(f"{manifest}: unreadable manifest; refusing to overwrite") from None
        if existing != schema_version:
            raise ConfigurationError(
                f"{path} holds schema version {existing}, this build writes {schema_version}; "
                "choose another output directory"
            )
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_manifest(
    out_dir: Path,
    command: str,
    config: Dict[str, Any],
    seeds: Sequence[int],
    artifacts: Iterable[Path],
) -> str:
    """Write ``manifest.json`` and return its SHA-256."""
    out_dir = Path(out_dir)
    hashes = {
        str(Path(p).relative_to(out_dir)): sha256_file(Path(p))
        for p in sorted(set(Path(a) for a in artifacts))
    }
    manifest = {
        "schema_version": settings.CSV_SCHEMA_VERSION,
        "command": command,
        "config": config,
        "seeds": list(seeds),
        "artifacts": hashes,
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    logger.info("manifest written to %s", path)
    return sha256_file(path)


def read_manifest(out_dir: Path) -> Dict[str, Any]:
    path = Path(out_dir) / MANIFEST_NAME
    if not path.exists():
        raise ConfigurationError(f"no {MANIFEST_NAME} in {out_dir}")
    return json.loads(path.read_text(encoding="utf-8"))


def record_run(
    command: str,
    name: str,
    out_dir: Path,
    config: Dict[str, Any],
    manifest_sha256: Optional[str],
    trials: List[Dict[str, Any]],
    status: RunStatus = RunStatus.COMPLETED,
) -> Optional[int]:
    """Store the run in the registry; a registry failure never fails the run."""
    try:
        init_db()
        db = SessionLocal()
        try:
            run = ExperimentRun(
                command=command,
                name=name,
                output_dir=str(Path(out_dir).resolve()),
                config_json=json.dumps(config, sort_keys=True, default=str),
                manifest_sha256=manifest_sha256,
                status=status,
            )
            run.trials = [
                TrialResult(
                    trial_index=row["trial"],
                    seed=row["seed"],
                    metrics_json=json.dumps(row, sort_keys=True, default=str),
                )
                for row in trials
            ]
            db.add(run)
            db.commit()
            db.refresh(run)
            return run.id
        finally:
            db.close()
    except SQLAlchemyError as exc:
        logger.warning("run registry unavailable, %s run not recorded: %s", command, exc)
        return None
