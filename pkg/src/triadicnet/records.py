"""Time-stamped trajectory records shared by all simulators."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Observable(enum.Enum):
    DENSITY = "density"
    EDGE_COUNT = "edge_count"


@dataclass
class PathRecord:
    """A piecewise-constant scalar observable sampled along one trajectory.

    ``times`` starts at 0 and is strictly increasing; ``values`` holds the
    observable at those times (edge density in [0, 1], or integer edge
    counts).
    """

    times: np.ndarray
    values: np.ndarray
    observable: Observable

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.values.ndim != 1:
            raise ValueError("times and values must be one-dimensional")
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if len(self.times) == 0:
            raise ValueError("a path record cannot be empty")
        if self.times[0] != 0.0:
            raise ValueError(f"times must start at 0, got {self.times[0]}")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        if self.observable is Observable.DENSITY:
            if self.values.min() < 0.0 or self.values.max() > 1.0:
                raise ValueError("density values must lie in [0, 1]")
        else:
            if np.any(self.values < 0) or np.any(self.values != np.round(self.values)):
                raise ValueError("edge-count values must be nonnegative integers")

    def __len__(self) -> int:
        return len(self.times)

    def value_at(self, t: float) -> float:
        """Observable at time ``t`` under the piecewise-constant convention."""
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        if idx < 0:
            raise ValueError(f"time {t} precedes the record start")
        return float(self.values[idx])


def resolve_stride(t_end: float, record_every: int | None, record_dt: float | None):
    """Validate the recording stride options and apply the default.

    Exactly one of ``record_every`` (record after every k-th event) and
    ``record_dt`` (sample on a fixed time grid, holding the last state) may
    be given; with neither, a 1000-point time grid over [0, t_end] is used.
    Returns ``(record_every, record_dt)`` with exactly one entry set.
    """
    if record_every is not None and record_dt is not None:
        raise ValueError("give at most one of record_every and record_dt")
    if record_every is None and record_dt is None:
        record_dt = t_end / 1000.0
    if record_every is not None:
        if record_every < 1 or record_every != int(record_every):
            raise ValueError(f"record_every must be a positive integer, got {record_every}")
        record_every = int(record_every)
    if record_dt is not None and not 0 < record_dt:
        raise ValueError(f"record_dt must be positive, got {record_dt}")
    return record_every, record_dt


def time_grid(t_end: float, record_dt: float) -> np.ndarray:
    """Uniform sampling grid 0, dt, 2*dt, ... covering [0, t_end]."""
    n = int(np.floor(t_end / record_dt + 1e-9))
    return np.arange(n + 1) * record_dt
