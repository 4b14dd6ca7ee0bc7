"""Fixed-step RK4 integration of the deterministic model on (0, N)."""

from __future__ import annotations

import numpy as np

from .grid import Engine, TimeGrid, Trajectory
from .model import DomainError, ModelError, ModelParams, drift

MAX_HALVINGS = 20
DEFAULT_DT = 0.01


class StepSizeError(ModelError):
    """A step left (0, N) even after repeated halving."""

    def __init__(self, message: str, suggested_dt: float):
        super().__init__(f"{message}; try dt <= {suggested_dt:.3g}")
        self.suggested_dt = suggested_dt


def step_rk4(p: ModelParams, R, dt: float):
    """One classical RK4 step of the drift. Works elementwise on arrays."""
    k1 = drift(R, p)
    k2 = drift(R + 0.5 * dt * k1, p)
    k3 = drift(R + 0.5 * dt * k2, p)
    k4 = drift(R + dt * k3, p)
    return R + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_checked(b, N: float, R: float, h: float) -> float | None:
    """RK4 step returning None if any stage state or the result leaves (0, N)."""
    k1 = b(R)
    s = R + 0.5 * h * k1
    if not 0.0 < s < N:
        return None
    k2 = b(s)
    s = R + 0.5 * h * k2
    if not 0.0 < s < N:
        return None
    k3 = b(s)
    s = R + h * k3
    if not 0.0 < s < N:
        return None
    k4 = b(s)
    out = R + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not 0.0 < out < N:
        return None
    return out


def integrate_ode(p: ModelParams, R0: float, grid: TimeGrid | None = None) -> Trajectory:
    """Integrate dR/dt = b(R) from ``R0`` on a uniform grid.

    A step whose stages leave (0, N) is redone as two half steps, recursively,
    up to ``MAX_HALVINGS`` levels; every rejection increments
    ``clamp_events``.
    """
    grid = grid or TimeGrid(dt=DEFAULT_DT)
    N = p.N
    if not 0 < R0 < N:
        raise DomainError(f"R0 must lie in (0, N={N:g}), got {R0}")

    beta, eps, lam = p.beta, p.epsilon, p.gamma + p.mu

    def b(R):
        return beta * R / (1.0 + eps * R) * (N - R) - lam * R

    rejections = 0

    def advance(R: float, h: float, depth: int) -> float:
        nonlocal rejections
        out = _rk4_checked(b, N, R, h)
        if out is not None:
            return out
        if depth >= MAX_HALVINGS:
            raise StepSizeError(
                f"RK4 step from R={R:g} leaves (0, N) after {MAX_HALVINGS} halvings",
                suggested_dt=grid.dt / 2 ** MAX_HALVINGS,
            )
        rejections += 1
        R = advance(R, 0.5 * h, depth + 1)
        return advance(R, 0.5 * h, depth + 1)

    n = grid.n_steps
    values = np.empty(n + 1)
    values[0] = R = float(R0)
    h = grid.dt
    for k in range(1, n + 1):
        R = advance(R, h, 0)
        values[k] = R

    return Trajectory(grid.times(), values, p, Engine.ODE, None, rejections)


def integrate_euler(p: ModelParams, R0: float, grid: TimeGrid) -> Trajectory:
    """Explicit Euler reference path; the noise-free limit of Euler-Maruyama."""
    if not 0 < R0 < p.N:
        raise DomainError(f"R0 must lie in (0, N={p.N:g}), got {R0}")
    values = np.empty(grid.n_points)
    values[0] = R = float(R0)
    dt = grid.dt
    for k in range(1, grid.n_points):
        R = R + drift(R, p) * dt
        values[k] = R
    return Trajectory(grid.times(), values, p, Engine.ODE)
