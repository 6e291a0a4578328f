from datetime import datetime, timezone
import enum

from sqlalchemy import Column, DateTime, Enum, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from app.database.connection import Base


class RunStatus(str, enum.Enum):
    """Lifecycle of a harness run."""
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class ExperimentRun(Base):
    """One CLI invocation and the directory it wrote."""

    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    command = Column(String(32), nullable=False, index=True)
    name = Column(String(255), nullable=False)
    output_dir = Column(String(1024), nullable=False)
    config_json = Column(Text, nullable=False)
    manifest_sha256 = Column(String(64), nullable=True)
    status = Column(Enum(RunStatus), default=RunStatus.RUNNING, nullable=False)
    created_at = Column(
        DateTime(timezone=True),
        default=lambda: datetime.now(timezone.utc),
        nullable=False
    )

    # Relationships
    trials = relationship(
        "TrialResult",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="TrialResult.trial_index",
    )

    def __repr__(self):
        return f"<ExperimentRun(id={self.id}, command='{self.command}', status='{self.status}')>"


class TrialResult(Base):
    """Metrics of one seeded trial."""

    __tablename__ = "trial_results"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("experiment_runs.id", ondelete="CASCADE"), nullable=False, index=True)
    trial_index = Column(Integer, nullable=False)
    seed = Column(Integer, nullable=False)
    metrics_json = Column(Text, nullable=False)

    # Relationships
    run = relationship("ExperimentRun", back_populates="trials")

    def __repr__(self):
        return f"<TrialResult(run_id={self.run_id}, trial={self.trial_index}, seed={self.seed})>"
