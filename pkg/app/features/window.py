from collections import deque
from typing import Deque, Iterable

import numpy as np

from app.core.exceptions import FeatureError


class WindowBuffer:
    """Sliding window of the most recent ``capacity`` samples.

    Positions not yet filled read as zeros, oldest first.
    """

    def __init__(self, capacity: int, samples: Iterable[float] = ()):
        if capacity < 1:
            raise FeatureError(f"window capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._samples: Deque[float] = deque(maxlen=capacity)
        for sample in samples:
            self.push(sample)

    def push(self, sample: float) -> None:
        self._samples.append(float(sample))

    def pop_latest(self) -> float:
        return self._samples.pop()

    def as_array(self) -> np.ndarray:
        frame = np.zeros(self.capacity)
        if self._samples:
            frame[self.capacity - len(self._samples):] = self._samples
        return frame

    @property
    def is_full(self) -> bool:
        return len(self._samples) == self.capacity

    def __len__(self) -> int:
        return len(self._samples)
