from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def epoch_count(delta: float) -> int:
    """Number of epochs for epoch length ``delta``: ``ceil(1/delta)``.

    ``1/delta`` is rounded to 9 decimals first so that e.g. ``delta=0.1``
    yields 10 epochs and not 11.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"epoch length must lie in (0, 1], got {delta}")
    return max(1, math.ceil(round(1.0 / delta, 9)))


@dataclass(frozen=True, eq=False)
class EpochLayout:
    """Epoch boundaries ``t_i = floor(i*T/m)`` in round units.

    Epoch ``i`` holds rounds ``t_i + 1 .. t_{i+1}`` (1-based), i.e. the
    0-based array slice ``[t_i, t_{i+1})``.
    """

    T: int
    boundaries: np.ndarray

    @classmethod
    def from_delta(cls, T: int, delta: float) -> "EpochLayout":
        if T < 1:
            raise ValueError("horizon T must be >= 1")
        m = epoch_count(delta)
        if m > T:
            raise ValueError(f"{m} epochs do not fit in T={T} rounds")
        b = (np.arange(m + 1, dtype=np.int64) * T) // m
        b.setflags(write=False)
        return cls(T, b)

    @classmethod
    def single(cls, T: int) -> "EpochLayout":
        b = np.array([0, T], dtype=np.int64)
        b.setflags(write=False)
        return cls(T, b)

    @property
    def n_epochs(self) -> int:
        return self.boundaries.size - 1

    def epoch_of(self, t: int) -> int:
        """Epoch index of 1-based round ``t``."""
        if not 1 <= t <= self.T:
            raise ValueError(f"round {t} outside 1..{self.T}")
        return int(np.searchsorted(self.boundaries, t, side="left")) - 1

    def lengths(self) -> np.ndarray:
        return np.diff(self.boundaries)
