from app.models.run import ExperimentRun, RunStatus, TrialResult

__all__ = ["ExperimentRun", "RunStatus", "TrialResult"]
