"""EWMA control-chart primitives."""
import math

from app.core.exceptions import ConfigurationError


def ewma_update(z_prev: float, d: float, lam: float) -> float:
    """Z(t) = (1 - lambda) Z(t-1) + lambda d(t)."""
    if not 0 < lam <= 1:
        raise ConfigurationError(f"lambda must be in (0, 1], got {lam}")
    if not (math.isfinite(z_prev) and math.isfinite(d)):
        raise ValueError(f"non-finite EWMA input: z_prev={z_prev}, d={d}")
    return (1.0 - lam) * z_prev + lam * d


def sigma_z(t: int, lam: float, sigma_x: float, inside_sqrt: bool = False) -> float:
    """Standard deviation of the EWMA after ``t`` steps.

    By default sigma_x multiplies the radical; ``inside_sqrt`` keeps it under it.
    """
    if t < 1:
        raise ConfigurationError(f"step counter must be >= 1, got {t}")
    if sigma_x < 0:
        raise ConfigurationError(f"sigma_x must be non-negative, got {sigma_x}")
    factor = (lam / (2.0 - lam)) * (1.0 - (1.0 - lam) ** (2 * t))
    if inside_sqrt:
        return math.sqrt(factor * sigma_x)
    return sigma_x * math.sqrt(factor)
