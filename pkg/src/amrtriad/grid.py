"""Uniform time grids and solution trajectories shared by the three engines."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .model import ModelError, ModelParams


class Engine(str, enum.Enum):
    ODE = "ode"
    SDE = "sde"
    FDE = "fde"


@dataclass(frozen=True)
class TimeGrid:
    t0: float = 0.0
    t_end: float = 50.0
    dt: float = 0.01

    def __post_init__(self):
        if not self.dt > 0:
            raise ModelError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > self.t0:
            raise ModelError(f"t_end ({self.t_end}) must exceed t0 ({self.t0})")
        if self.n_steps < 1:
            raise ModelError("grid has no steps; dt exceeds the horizon")

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t0) / self.dt))

    @property
    def n_points(self) -> int:
        return self.n_steps + 1

    def times(self) -> np.ndarray:
        # t0 + k*dt, not linspace: keeps every engine on bit-identical nodes
        return self.t0 + self.dt * np.arange(self.n_points, dtype=float)


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    params: ModelParams
    engine: Engine
    seed: int | None = None
    clamp_events: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ModelError("times and values must be 1-D arrays of equal length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ModelError("times must be strictly increasing")
        if self.engine is Engine.ODE and self.seed is not None:
            raise ModelError("deterministic trajectories carry no seed")

    def __len__(self) -> int:
        return self.values.size

    @property
    def terminal_value(self) -> float:
        return float(self.values[-1])

    def at(self, t: float) -> float:
        """Value at the grid node nearest to ``t``."""
        i = int(np.argmin(np.abs(self.times - t)))
        return float(self.values[i])

    def window(self, t_start: float, t_stop: float | None = None) -> Trajectory:
        mask = self.times >= t_start
        if t_stop is not None:
            mask &= self.times <= t_stop
        return Trajectory(
            self.times[mask], self.values[mask], self.params, self.engine,
            self.seed, self.clamp_events, dict(self.meta),
        )
