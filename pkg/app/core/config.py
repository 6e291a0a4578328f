from pathlib import Path
from typing import List

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Application
    APP_NAME: str = "SAFE Drift Toolkit"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Run registry
    DATABASE_URL: str = "sqlite:///./safe_runs.db"

    # Experiments
    OUTPUT_DIR: Path = Path("runs")
    DEFAULT_SEED: int = 1
    WORKERS: int = 1
    CSV_SCHEMA_VERSION: int = 1

    # Test builds only: admits noise_std == 0 in process specs
    ALLOW_ZERO_NOISE: bool = False

    # Streaming sessions
    MAX_STREAM_SESSIONS: int = 256

    # CORS
    CORS_ORIGINS: List[str] = [
        "http://localhost:3000",
        "http://localhost:8080",
        "http://127.0.0.1:3000",
        "http://127.0.0.1:8080",
    ]

    class Config:
        env_file = ".env"
        case_sensitive = True


settings = Settings()
