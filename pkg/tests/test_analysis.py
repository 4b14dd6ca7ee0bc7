import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amrtriad.analysis import (
    Histogram,
    OutcomeKind,
    band_entries,
    band_entry_time,
    classify_outcome,
    level_crossings,
    log_slope,
    stationary_histogram,
    time_to_band,
)
from amrtriad.grid import Engine, TimeGrid, Trajectory
from amrtriad.model import DomainError, ModelError, ModelParams, equilibrium_deterministic
from amrtriad.ode import integrate_ode
from amrtriad.sde import simulate_ensemble

TABLE = ModelParams()
N = TABLE.N


def _traj(values, t_end=10.0):
    values = np.asarray(values, dtype=float)
    times = np.linspace(0.0, t_end, values.size)
    return Trajectory(times, values, TABLE, Engine.ODE)


def test_classify_ode_examples():
    ext = integrate_ode(TABLE.with_(gamma=2.0), N - 1, TimeGrid(0.0, 50.0, 0.01))
    out = classify_outcome(ext)
    assert out.kind is OutcomeKind.EXTINCT and out.terminal_value < 1.0

    per = integrate_ode(TABLE, 1.0, TimeGrid(0.0, 200.0, 0.01))
    out = classify_outcome(per)
    assert out.kind is OutcomeKind.PERSISTENT
    assert out.attractor_estimate == pytest.approx(666666.67, rel=1e-3)


def test_classify_constant_and_indeterminate():
    xi = equilibrium_deterministic(TABLE)
    assert classify_outcome(_traj(np.full(100, xi))).kind is OutcomeKind.PERSISTENT
    rising = _traj(np.linspace(1.0, 5e5, 100))
    assert classify_outcome(rising).kind is OutcomeKind.INDETERMINATE
    with pytest.raises(ModelError):
        classify_outcome(Trajectory(np.array([]), np.array([]), TABLE, Engine.ODE))


def test_outcome_contract():
    for values in (np.geomspace(1e5, 1e-3, 200), np.full(50, 3e5), np.linspace(1, 9e5, 60)):
        out = classify_outcome(_traj(values))
        if out.kind is OutcomeKind.EXTINCT:
            assert out.terminal_value < 1.0
        if out.kind is OutcomeKind.PERSISTENT:
            assert out.attractor_estimate is not None


@settings(max_examples=100, deadline=None)
@given(st.floats(10.0, 9e5), st.integers(10, 200), st.integers(1, 500))
def test_classify_idempotent_under_converged_tail(level, n, extra):
    values = np.concatenate([np.linspace(1.0, level, n), np.full(10 * n, level)])
    a = classify_outcome(_traj(values))
    b = classify_outcome(_traj(np.concatenate([values, np.full(extra, level)])))
    assert a.kind is b.kind


def test_log_slope_examples():
    t = np.linspace(0.0, 10.0, 1001)
    exp_traj = Trajectory(t, np.exp(-1.6 * t), TABLE, Engine.ODE)
    assert log_slope(exp_traj) == pytest.approx(-1.6, abs=1e-6)
    assert log_slope(_traj(np.full(100, 7.0))) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        log_slope(_traj([1.0, 0.0, 1.0]))

    p = TABLE.with_(gamma=2.0)
    ext = integrate_ode(p, N - 1, TimeGrid(0.0, 50.0, 0.01))
    assert log_slope(ext) <= p.beta * N - (p.gamma + p.mu) + 0.05


def test_level_crossings_examples():
    assert level_crossings(_traj(np.linspace(0.0, 1.0, 50)), 2.0) == 0
    t = np.linspace(0.0, 5.0, 5001)
    sine = 10.0 + np.sin(2 * np.pi * t + 0.3)
    assert level_crossings(_traj(sine, 5.0), 10.0) == 10
    # touching the level is not a crossing
    assert level_crossings(_traj([0.0, 1.0, 0.0]), 1.0) == 0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.1, 100.0), min_size=2, max_size=60), st.floats(0.1, 100.0))
def test_level_crossings_invariant_under_monotone_maps(values, level):
    v = np.array(values)
    base = level_crossings(_traj(v), level)
    assert level_crossings(_traj(np.log(v)), np.log(level)) == base
    assert level_crossings(_traj(v**3 + 2 * v), level**3 + 2 * level) == base


def test_band_helpers():
    tr = _traj([0.0, 5.0, 10.0, 5.0, 10.0, 10.0])
    assert band_entries(tr, 10.0, 0.01) == 2
    assert band_entry_time(tr, 10.0, 0.01) == pytest.approx(4.0)
    assert band_entry_time(tr, 100.0, 0.01) is None


def test_histogram_zero_noise_single_bin():
    xi = equilibrium_deterministic(TABLE)
    ens = simulate_ensemble(TABLE.with_(sigma=0.0), xi, TimeGrid(0.0, 5.0, 0.01), 10)
    h = stationary_histogram(ens, 0.5, 60)
    assert h.bin_mass.max() == 1.0
    k = int(np.argmax(h.bin_mass))
    assert h.bin_edges[k] < xi <= h.bin_edges[k + 1]


def test_histogram_validation_and_mass():
    ens = simulate_ensemble(TABLE.with_(sigma=1e-6), 5e5, TimeGrid(0.0, 2.0, 0.01), 20)
    h = stationary_histogram(ens, 0.2, 30)
    assert isinstance(h, Histogram)
    assert abs(h.bin_mass.sum() - 1.0) <= 1e-12
    assert h.bin_edges[0] == 0.0 and h.bin_edges[-1] == N
    assert h.mode() in h.centers
    with pytest.raises(ModelError):
        stationary_histogram(ens, 1.0)
    with pytest.raises(ModelError):
        stationary_histogram(ens, 0.5, 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-3, N), min_size=4, max_size=40), st.integers(2, 80))
def test_histogram_mass_sums_to_one(values, bins):
    from amrtriad.sde import EnsembleResult

    v = np.array(values).reshape(1, -1)
    ens = EnsembleResult(np.arange(v.shape[1], dtype=float), v, TABLE, 0, np.zeros(1, int), 1)
    h = stationary_histogram(ens, 0.0, bins)
    assert abs(h.bin_mass.sum() - 1.0) <= 1e-12


def test_time_to_band_grows_horizon():
    p = TABLE.with_(gamma=0.2)
    t_hit, grid = time_to_band(p, 1.0, 0.8, equilibrium_deterministic(p), 0.01,
                               t_end=100.0, n_steps=4000)
    assert grid.t_end >= t_hit > 100.0
