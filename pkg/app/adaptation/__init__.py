from app.adaptation.proportional import (
    ADAPTATION_LOG_COLUMNS,
    AdaptationReport,
    ReplayAdapter,
    adaptation_frame,
    on_flag,
    write_adaptation_log,
)
from app.adaptation.replay import ReplayBuffer, ReplayPair, minibatch_size, round_half_away

__all__ = [
    "ADAPTATION_LOG_COLUMNS",
    "AdaptationReport",
    "ReplayAdapter",
    "adaptation_frame",
    "on_flag",
    "write_adaptation_log",
    "ReplayBuffer",
    "ReplayPair",
    "minibatch_size",
    "round_half_away",
]
