"""Seeded Euler-Maruyama integration of the noisy model and ensemble statistics.

Noise is drawn from numpy's PCG64 bit generator. Each raw 64-bit word is
reduced to a 53-bit uniform on the open interval (0, 1) and mapped to a
standard normal either by the inverse normal CDF (one word per increment)
or by Box-Muller (two words per pair of increments). Path ``i`` of an ensemble
uses seed ``base_seed + i``, so any path can be replayed on its own with
:func:`simulate_path`.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .grid import Engine, TimeGrid, Trajectory
from .model import DomainError, ModelError, ModelParams, drift
from .ode import StepSizeError

GENERATOR_ID = "numpy.PCG64"
BOUNDARY_FRACTION = 1e-9
CHUNK = 4096
_TWO_M53 = 2.0**-53


class IncrementRule(str, enum.Enum):
    INVERSE_CDF = "GaussianInverseCdf"
    BOX_MULLER = "BoxMuller"


@dataclass(frozen=True)
class NoisePlan:
    seed: int = 0
    generator_id: str = GENERATOR_ID
    increment_rule: IncrementRule = IncrementRule.INVERSE_CDF

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ModelError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.generator_id != GENERATOR_ID:
            raise ModelError(f"unsupported generator {self.generator_id!r}")
        object.__setattr__(self, "increment_rule", IncrementRule(self.increment_rule))


class GaussianStream:
    """Deterministic stream of standard normals for one seed."""

    def __init__(self, seed: int, rule: IncrementRule = IncrementRule.INVERSE_CDF):
        self._bits = np.random.PCG64(int(seed))
        self.rule = IncrementRule(rule)
        self._spare = None

    def uniforms(self, n: int) -> np.ndarray:
        raw = self._bits.random_raw(n)
        return ((raw >> np.uint64(11)).astype(float) + 0.5) * _TWO_M53

    def normals(self, n: int) -> np.ndarray:
        if self.rule is IncrementRule.INVERSE_CDF:
            return ndtri(self.uniforms(n))
        out = np.empty(n)
        start = 0
        if self._spare is not None and n > 0:
            out[0] = self._spare
            self._spare = None
            start = 1
        m = n - start
        pairs = (m + 1) // 2
        if pairs:
            u = self.uniforms(2 * pairs).reshape(pairs, 2)
            r = np.sqrt(-2.0 * np.log(u[:, 0]))
            theta = 2.0 * np.pi * u[:, 1]
            z = np.column_stack((r * np.cos(theta), r * np.sin(theta))).ravel()
            out[start:] = z[:m]
            if m % 2:
                self._spare = z[-1]
        return out


def _check_dt(p: ModelParams, dt: float) -> None:
    R = np.linspace(0.0, p.N, 2001)
    bound = float(np.max(np.abs(drift(R, p)))) * dt
    if bound > p.N:
        raise StepSizeError(
            f"drift*dt reaches {bound:.3g} > N", suggested_dt=p.N / np.max(np.abs(drift(R, p)))
        )


def euler_maruyama(p: ModelParams, R0, dt: float, increments, store_every: int = 1):
    """Vectorised EM kernel driven by explicit Brownian increments.

    ``increments`` is an iterable of arrays shaped ``(n_paths, k)`` holding
    dB (already scaled by sqrt(dt)); chunks are consumed in order. Steps that
    leave (0, N) are projected to ``[delta, N - delta]``, ``delta = 1e-9 N``.

    Returns ``(values, clamp_counts)`` with ``values`` of shape
    ``(n_paths, n_stored)``; the initial state is always stored.
    """
    R = np.array(R0, dtype=float, ndmin=1)
    N = p.N
    delta = BOUNDARY_FRACTION * N
    store = [R.copy()]
    clamps = np.zeros(R.shape, dtype=np.int64)
    step = 0
    for dB in increments:
        dB = np.asarray(dB, dtype=float).reshape(R.size, -1)
        for j in range(dB.shape[1]):
            R = R + drift(R, p) * dt + p.sigma * R / (1.0 + p.epsilon * R) * (N - R) * dB[:, j]
            low = R <= 0.0
            high = R >= N
            if low.any() or high.any():
                clamps += low | high
                R[low] = delta
                R[high] = N - delta
            step += 1
            if step % store_every == 0:
                store.append(R.copy())
    return np.stack(store, axis=1), clamps


def _noise_chunks(streams, n_steps: int, sqdt: float):
    done = 0
    while done < n_steps:
        k = min(CHUNK, n_steps - done)
        yield np.stack([s.normals(k) for s in streams]) * sqdt
        done += k


def _validate(p: ModelParams, R0: float, grid: TimeGrid, store_every: int) -> None:
    if not 0 < R0 < p.N:
        raise DomainError(f"R0 must lie in (0, N={p.N:g}), got {R0}")
    if store_every < 1 or grid.n_steps % store_every:
        raise ModelError(f"store_every={store_every} must divide n_steps={grid.n_steps}")
    _check_dt(p, grid.dt)


def _run_block(p, R0, grid, seeds, rule, store_every):
    streams = [GaussianStream(s, rule) for s in seeds]
    R_init = np.full(len(seeds), float(R0))
    return euler_maruyama(
        p, R_init, grid.dt, _noise_chunks(streams, grid.n_steps, math.sqrt(grid.dt)), store_every
    )


def simulate_path(
    p: ModelParams,
    R0: float,
    grid: TimeGrid,
    noise: NoisePlan | None = None,
    store_every: int = 1,
) -> Trajectory:
    """One Euler-Maruyama path, reproducible from ``noise``."""
    noise = noise or NoisePlan()
    _validate(p, R0, grid, store_every)
    values, clamps = _run_block(p, R0, grid, [noise.seed], noise.increment_rule, store_every)
    times = grid.times()[::store_every]
    return Trajectory(
        times, values[0], p, Engine.SDE, int(noise.seed), int(clamps[0]),
        {"generator": noise.generator_id, "increment_rule": noise.increment_rule.value,
         "n_steps": grid.n_steps},
    )


@dataclass
class EnsembleResult:
    times: np.ndarray
    values: np.ndarray  # (n_paths, n_times)
    params: ModelParams
    base_seed: int
    clamp_events: np.ndarray
    n_steps: int
    increment_rule: IncrementRule = IncrementRule.INVERSE_CDF
    per_time_mean: np.ndarray = field(init=False)
    per_time_variance: np.ndarray = field(init=False)

    def __post_init__(self):
        self.per_time_mean, self.per_time_variance = _welford(self.values)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.n_paths)]

    @property
    def paths(self) -> list[Trajectory]:
        return [self.path(i) for i in range(self.n_paths)]

    def path(self, i: int) -> Trajectory:
        return Trajectory(
            self.times, self.values[i], self.params, Engine.SDE,
            self.base_seed + i, int(self.clamp_events[i]),
        )

    @property
    def clamp_fraction(self) -> float:
        return float(self.clamp_events.sum()) / (self.n_paths * self.n_steps)


def _welford(values: np.ndarray):
    """Mean and population variance over paths, accumulated in path order."""
    mean = np.zeros(values.shape[1])
    m2 = np.zeros(values.shape[1])
    for k, row in enumerate(values, start=1):
        d = row - mean
        mean += d / k
        m2 += d * (row - mean)
    return mean, m2 / values.shape[0]


def simulate_ensemble(
    p: ModelParams,
    R0: float,
    grid: TimeGrid,
    n_paths: int,
    base_seed: int = 0,
    *,
    increment_rule: IncrementRule = IncrementRule.INVERSE_CDF,
    store_every: int = 1,
    threads: int = 1,
) -> EnsembleResult:
    """Run ``n_paths`` independent paths; path ``i`` is seeded ``base_seed + i``.

    Results do not depend on ``threads``: paths are split into contiguous
    blocks and reassembled by index.
    """
    if n_paths < 1:
        raise ModelError(f"n_paths must be >= 1, got {n_paths}")
    _validate(p, R0, grid, store_every)
    NoisePlan(base_seed + n_paths - 1)  # range check on the largest derived seed
    seeds = [base_seed + i for i in range(n_paths)]
    rule = IncrementRule(increment_rule)

    threads = max(1, min(threads, n_paths))
    bounds = np.linspace(0, n_paths, threads + 1).astype(int)
    blocks = [seeds[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    def run(i_block):
        i, block = i_block
        try:
            return _run_block(p, R0, grid, block, rule, store_every)
        except ModelError as exc:
            raise ModelError(f"path block starting at index {bounds[i]}: {exc}") from exc

    if threads == 1:
        results = [run((0, blocks[0]))]
    else:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, enumerate(blocks)))

    values = np.concatenate([r[0] for r in results])
    clamps = np.concatenate([r[1] for r in results])
    return EnsembleResult(
        grid.times()[::store_every], values, p, base_seed, clamps, grid.n_steps, rule
    )
