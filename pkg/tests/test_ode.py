import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amrtriad.grid import Engine, TimeGrid, Trajectory
from amrtriad.model import DomainError, ModelError, ModelParams, drift, equilibrium_deterministic
from amrtriad.ode import StepSizeError, integrate_euler, integrate_ode, step_rk4

TABLE = ModelParams()
N = TABLE.N


def _rk4_reference(p, R0, t_end, dt):
    """Plain scalar RK4, written independently of the library loop."""
    n = int(round(t_end / dt))
    R = R0
    for _ in range(n):
        k1 = drift(R, p)
        k2 = drift(R + dt / 2 * k1, p)
        k3 = drift(R + dt / 2 * k2, p)
        k4 = drift(R + dt * k3, p)
        R = R + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return R


def test_time_grid():
    g = TimeGrid(0.0, 50.0, 0.01)
    assert g.n_steps == 5000 and g.n_points == 5001
    assert g.times()[-1] == pytest.approx(50.0)
    with pytest.raises(ModelError):
        TimeGrid(0.0, 1.0, 0.0)
    with pytest.raises(ModelError):
        TimeGrid(1.0, 1.0, 0.1)


def test_trajectory_invariants():
    with pytest.raises(ModelError):
        Trajectory(np.array([0.0, 0.0]), np.array([1.0, 1.0]), TABLE, Engine.ODE)
    with pytest.raises(ModelError):
        Trajectory(np.array([0.0, 1.0]), np.array([1.0, 1.0]), TABLE, Engine.ODE, seed=3)


def test_extinction_example():
    p = TABLE.with_(gamma=2.0)
    traj = integrate_ode(p, N - 1, TimeGrid(0.0, 50.0, 0.01))
    assert traj.terminal_value < 1.0
    assert traj.seed is None and traj.engine is Engine.ODE
    # the independent loop at a finer step agrees
    ref = _rk4_reference(p, N - 1, 50.0, 1e-3)
    assert traj.terminal_value == pytest.approx(ref, rel=1e-6)


def test_persistence_example():
    traj = integrate_ode(TABLE, 1.0, TimeGrid(0.0, 200.0, 0.01))
    assert abs(traj.terminal_value - 666666.67) / 666666.67 < 1e-3


def test_constant_at_equilibrium():
    xi = equilibrium_deterministic(TABLE)
    traj = integrate_ode(TABLE, xi, TimeGrid(0.0, 100.0, 0.01))
    assert np.max(np.abs(traj.values - xi)) <= 1e-9 * N


def test_step_fixed_point_and_sign():
    xi = equilibrium_deterministic(TABLE)
    assert abs(step_rk4(TABLE, xi, 0.01) - xi) <= 1e-12 * N
    assert step_rk4(TABLE.with_(gamma=2.0), N / 2, 0.01) < N / 2


def test_step_order_richardson():
    # one-step local error is O(h^5); successive differences shrink by ~2^4 per halving
    p = TABLE.with_(gamma=0.2)
    R = 3e5
    hs = [0.4, 0.2, 0.1, 0.05]

    def advance(h, t=0.8):
        x = R
        for _ in range(int(round(t / h))):
            x = step_rk4(p, x, h)
        return x

    vals = [advance(h) for h in hs]
    diffs = [abs(vals[i] - vals[i + 1]) for i in range(len(vals) - 1)]
    orders = [math.log2(diffs[i] / diffs[i + 1]) for i in range(len(diffs) - 1)]
    assert min(orders) >= 3.9


def test_global_order_persistence_scenario():
    # reference at dt = 1e-4 over a short horizon keeps truncation above rounding
    p = TABLE.with_(gamma=0.2)
    ref = integrate_ode(p, 1000.0, TimeGrid(0.0, 40.0, 1e-4)).terminal_value
    errs = {h: abs(integrate_ode(p, 1000.0, TimeGrid(0.0, 40.0, h)).terminal_value - ref)
            for h in (0.8, 0.4, 0.2, 0.1)}
    for h in (0.8, 0.4, 0.2):
        ratio = errs[h] / errs[h / 2]
        assert 8.0 <= ratio <= 32.0  # 2^4 within a factor 2


def test_extinction_rate_bound_pathwise():
    for g in (1.0, 1.25, 1.5, 1.75, 2.0):
        p = TABLE.with_(gamma=g)
        traj = integrate_ode(p, N - 1, TimeGrid(0.0, 50.0, 0.01))
        t = traj.times[1:]
        lhs = np.log(traj.values[1:]) / t
        rhs = math.log(N - 1) / t + p.beta * N - (g + p.mu)
        assert np.all(lhs <= rhs + 1e-12)


def test_domain_errors():
    g = TimeGrid(0.0, 1.0, 0.01)
    for R0 in (0.0, N, -1.0, N + 1):
        with pytest.raises(DomainError):
            integrate_ode(TABLE, R0, g)


def test_step_rejection_counts_clamps():
    # a huge step overshoots below zero; halving recovers it
    p = TABLE.with_(gamma=2.0)
    traj = integrate_ode(p, 10.0, TimeGrid(0.0, 10.0, 2.0))
    assert traj.clamp_events > 0
    assert np.all((traj.values > 0) & (traj.values < N))
    assert traj.terminal_value == pytest.approx(_rk4_reference(p, 10.0, 10.0, 0.5), rel=0.2)


def test_step_size_error_has_suggestion():
    p = ModelParams(mu=1e8)
    with pytest.raises(StepSizeError) as info:
        integrate_ode(p, 10.0, TimeGrid(0.0, 1.0, 1.0))
    assert info.value.suggested_dt < 1.0


def test_euler_reference():
    p = TABLE.with_(gamma=0.2)
    g = TimeGrid(0.0, 1.0, 0.5)
    traj = integrate_euler(p, 1000.0, g)
    x1 = 1000.0 + 0.5 * drift(1000.0, p)
    assert traj.values[1] == x1
    assert traj.values[2] == x1 + 0.5 * drift(x1, p)


@settings(max_examples=500, deadline=None)
@given(
    st.floats(0.0, 2.0),
    st.floats(1e-7, 2e-6),
    st.floats(0.0, 1e-5),
    st.floats(1e-6, 1.0 - 1e-6),
    st.sampled_from([0.01, 0.005, 0.0025]),
)
def test_invariance_random_draws(gamma, beta, eps, frac, dt):
    p = ModelParams(gamma=gamma, beta=beta, epsilon=eps)
    traj = integrate_ode(p, frac * N, TimeGrid(0.0, 2.0, dt))
    assert np.all((traj.values > 0) & (traj.values < N))
