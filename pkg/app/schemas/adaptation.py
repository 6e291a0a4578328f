from enum import Enum

from pydantic import BaseModel, Field, model_validator

from app.schemas.predictor import EpochPolicy


class AdaptationMode(str, Enum):
    """When the predictor gets retrained."""
    PROPORTIONAL = "proportional"  # on detector flags, replay sized by deviation
    BLIND = "blind"  # every step
    NONE = "none"


def _online_policy() -> EpochPolicy:
    return EpochPolicy(max_epochs=20, patience=3, batch_size=32)


class AdaptationConfig(BaseModel):
    """Proportional-replay settings."""
    mode: AdaptationMode = AdaptationMode.PROPORTIONAL
    beta: float = Field(0.1, gt=0)
    u_min: int = Field(8, ge=0)
    u_max: int = Field(2000, ge=1)
    # Pairs ending at the flagged step used for validation
    validation_pairs: int = Field(1, ge=1)
    buffer_capacity: int = Field(5000, ge=1)
    epoch_policy: EpochPolicy = Field(default_factory=_online_policy)

    @model_validator(mode="after")
    def validate_bounds(self) -> "AdaptationConfig":
        if self.u_min > self.u_max:
            raise ValueError(f"u_min ({self.u_min}) must not exceed u_max ({self.u_max})")
        if self.u_max > self.buffer_capacity:
            raise ValueError(
                f"u_max ({self.u_max}) cannot exceed buffer_capacity ({self.buffer_capacity})"
            )
        return self
