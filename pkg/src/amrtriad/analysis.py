"""Post-processing of trajectories and ensembles."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grid import TimeGrid, Trajectory
from .model import DomainError, ModelError, ModelParams
from .sde import EnsembleResult

EXTINCTION_FLOOR = 1.0
PERSISTENCE_BAND = 0.02
TERMINAL_WINDOW = 0.10
DEFAULT_BURN_IN = 0.5
DEFAULT_BINS = 60


class OutcomeKind(str, enum.Enum):
    EXTINCT = "Extinct"
    PERSISTENT = "Persistent"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    terminal_value: float
    attractor_estimate: float | None = None
    log_slope: float | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "terminal_value": self.terminal_value,
            "attractor_estimate": self.attractor_estimate,
            "log_slope": self.log_slope,
        }


def _terminal_window(values: np.ndarray, fraction: float) -> np.ndarray:
    n = max(1, int(np.ceil(fraction * values.size)))
    return values[-n:]


def classify_outcome(
    traj: Trajectory,
    p: ModelParams | None = None,
    *,
    floor: float = EXTINCTION_FLOOR,
    band: float = PERSISTENCE_BAND,
    window: float = TERMINAL_WINDOW,
) -> Outcome:
    """Extinct / Persistent / Indeterminate from the last ``window`` of the grid.

    Extinct when the window's maximum is below ``floor``; Persistent when the
    window stays within ``band`` (relative) of its mean and that mean exceeds
    ``floor``.
    """
    if len(traj) == 0:
        raise ModelError("cannot classify an empty trajectory")
    tail = _terminal_window(traj.values, window)
    terminal = traj.terminal_value
    slope = log_slope(traj) if np.all(traj.values > 0) and len(traj) > 2 else None

    if tail.max() < floor:
        return Outcome(OutcomeKind.EXTINCT, terminal, None, slope)
    level = float(tail.mean())
    if level > floor and np.all(np.abs(tail - level) <= band * level):
        return Outcome(OutcomeKind.PERSISTENT, terminal, level, slope)
    return Outcome(OutcomeKind.INDETERMINATE, terminal, None, slope)


def log_slope(traj: Trajectory) -> float:
    """Least-squares slope of ln R against t over the second half of the grid."""
    values = traj.values
    if np.any(values <= 0):
        raise DomainError("log_slope needs strictly positive values")
    half = values.size // 2
    t = traj.times[half:]
    y = np.log(values[half:])
    if t.size < 2:
        raise ModelError("need at least two points in the second half")
    tc = t - t.mean()
    return float(np.dot(tc, y - y.mean()) / np.dot(tc, tc))


def level_crossings(traj: Trajectory, level: float) -> int:
    """Sign changes of ``R - level`` between consecutive grid points.

    Touching the level exactly does not count as a crossing by itself.
    """
    s = np.sign(np.asarray(traj.values) - level)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def band_entries(traj: Trajectory, level: float, rel_band: float) -> int:
    """Number of times the path (re-)enters ``level * (1 +- rel_band)``."""
    inside = np.abs(traj.values - level) <= rel_band * level
    return int(np.count_nonzero(inside[1:] & ~inside[:-1]))


def band_entry_time(traj: Trajectory, level: float, rel_band: float) -> float | None:
    """First time the path lies within ``rel_band`` of ``level``; None if never."""
    inside = np.abs(traj.values - level) <= rel_band * level
    if not inside.any():
        return None
    return float(traj.times[int(np.argmax(inside))])


@dataclass
class Histogram:
    bin_edges: np.ndarray
    bin_mass: np.ndarray
    n_samples: int
    burn_in_fraction: float
    sample_mean: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def mean(self) -> float:
        """Mean of the binned distribution (bin midpoints)."""
        return float(np.dot(self.centers, self.bin_mass))

    def mode(self) -> float:
        return float(self.centers[int(np.argmax(self.bin_mass))])


def stationary_histogram(
    ens: EnsembleResult,
    burn_in: float = DEFAULT_BURN_IN,
    n_bins: int = DEFAULT_BINS,
) -> Histogram:
    """Pool post-burn-in samples of every path into equal bins over (0, N].

    Samples are taken from time ``t0 + burn_in * (t_end - t0)`` onwards.
    """
    if not 0 <= burn_in < 1:
        raise ModelError(f"burn_in must lie in [0, 1), got {burn_in}")
    if n_bins < 2:
        raise ModelError(f"n_bins must be >= 2, got {n_bins}")
    times = ens.times
    cutoff = times[0] + burn_in * (times[-1] - times[0])
    samples = ens.values[:, times >= cutoff].ravel()
    if samples.size == 0:
        raise ModelError("no samples after burn-in")

    N = ens.params.N
    edges = np.linspace(0.0, N, n_bins + 1)
    # right-closed bins over (0, N]: index = ceil(R / width) - 1
    idx = np.clip(np.ceil(samples / (N / n_bins)).astype(np.int64) - 1, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins).astype(float)
    return Histogram(
        edges, counts / counts.sum(), int(samples.size), float(burn_in), float(samples.mean())
    )


def time_to_band(
    p: ModelParams,
    R0: float,
    alpha: float,
    level: float,
    rel_band: float = 0.01,
    *,
    t_end: float = 500.0,
    n_steps: int = 20_000,
    growth: float = 4.0,
    max_t: float = 5e6,
) -> tuple[float, TimeGrid]:
    """First entry of the Caputo solution into the band around ``level``.

    Memory effects make the approach to equilibrium algebraic in t, so the
    horizon is stretched geometrically (at fixed step count) until the band
    is reached. Returns the entry time and the grid it was resolved on.
    """
    from .fde import solve_caputo

    while t_end <= max_t:
        grid = TimeGrid(0.0, t_end, t_end / n_steps)
        t_hit = band_entry_time(solve_caputo(p, R0, grid, alpha=alpha), level, rel_band)
        if t_hit is not None:
            return t_hit, grid
        t_end *= growth
    raise ModelError(f"band not reached before t = {max_t:g}")
