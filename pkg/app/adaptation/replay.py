"""Chronological replay store and proportional mini-batch sizing."""
import math
from collections import deque
from typing import Deque, List, NamedTuple, Optional, Tuple

import numpy as np


class ReplayPair(NamedTuple):
    t: int
    x: np.ndarray
    y: float


class ReplayBuffer:
    """Bounded FIFO of ``(t, input, target)`` pairs in strictly increasing ``t``."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._pairs: Deque[ReplayPair] = deque(maxlen=capacity)

    def push(self, t: int, x: np.ndarray, y: float) -> None:
        if self._pairs and t <= self._pairs[-1].t:
            raise ValueError(f"pair index {t} is not after the latest index {self._pairs[-1].t}")
        self._pairs.append(ReplayPair(int(t), np.array(x, dtype=np.float64), float(y)))

    def __len__(self) -> int:
        return len(self._pairs)

    @property
    def latest_t(self) -> Optional[int]:
        return self._pairs[-1].t if self._pairs else None

    def before(self, t: int, count: Optional[int] = None) -> List[ReplayPair]:
        """Up to ``count`` most recent pairs with index strictly below ``t``, oldest first."""
        eligible = [p for p in self._pairs if p.t < t]
        if count is not None:
            eligible = eligible[-count:] if count > 0 else []
        return eligible

    def window(self, start: int, stop: int) -> List[ReplayPair]:
        """Pairs with ``start <= t <= stop``."""
        return [p for p in self._pairs if start <= p.t <= stop]

    def clear(self) -> None:
        self._pairs.clear()


def stack(pairs: List[ReplayPair]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inputs, targets and indices of a pair list."""
    if not pairs:
        return np.empty((0, 0)), np.empty(0), np.empty(0, dtype=int)
    return (
        np.vstack([p.x for p in pairs]),
        np.array([p.y for p in pairs]),
        np.array([p.t for p in pairs], dtype=int),
    )


def round_half_away(value: float) -> int:
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def minibatch_size(
    Z: float,
    sma: float,
    beta: float,
    *,
    u_min: int = 0,
    u_max: Optional[int] = None,
    available: Optional[int] = None,
) -> int:
    """u = round(beta |Z - sma|), floored at ``u_min`` then capped by ``min(u_max, available)``."""
    if not (math.isfinite(Z) and math.isfinite(sma) and math.isfinite(beta)):
        raise ValueError(f"non-finite mini-batch input: Z={Z}, sma={sma}, beta={beta}")
    u = max(round_half_away(beta * abs(Z - sma)), u_min)
    caps = [c for c in (u_max, available) if c is not None]
    if caps:
        u = min(u, min(caps))
    return max(u, 0)
