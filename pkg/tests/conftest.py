import os
import tempfile
from pathlib import Path

# Settings are read at import time, so the environment is set before any app import
_TMP = Path(tempfile.mkdtemp(prefix="safe-tests-"))
os.environ["DATABASE_URL"] = f"sqlite:///{_TMP / 'registry.db'}"
os.environ["OUTPUT_DIR"] = str(_TMP / "runs")
os.environ["ALLOW_ZERO_NOISE"] = "true"
os.environ["LOG_LEVEL"] = "WARNING"

import numpy as np  # noqa: E402
import pytest  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def csv_file(tmp_path):
    def write(text: str, name: str = "series.csv") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
