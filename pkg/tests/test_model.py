import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amrtriad.model import (
    DomainError,
    ModelParams,
    NoEquilibriumError,
    ParameterError,
    Regime,
    compute_thresholds,
    diffusion,
    drift,
    equilibrium_deterministic,
    equilibrium_stochastic,
    functional_response,
    lyapunov_sV,
    persistence_level_eta,
)

TABLE = ModelParams()


def test_table_defaults():
    assert (TABLE.N, TABLE.mu, TABLE.beta, TABLE.epsilon) == (1e6, 0.1, 5e-7, 1e-6)


@pytest.mark.parametrize("field,value", [
    ("N", 0.0), ("beta", 0.0), ("mu", -0.1), ("sigma", -1e-7),
    ("alpha", 0.0), ("alpha", 1.5), ("N", math.nan),
])
def test_invalid_params_rejected(field, value):
    with pytest.raises(ParameterError):
        TABLE.with_(**{field: value})


def test_zero_loss_rate_rejected():
    with pytest.raises(ParameterError):
        ModelParams(mu=0.0, gamma=0.0)


def test_functional_response():
    assert functional_response(0.0, 1e-6) == 0.0
    assert functional_response(1e6, 1e-6) == pytest.approx(5e5, rel=1e-15)
    assert functional_response(1e6, 0.0) == 1e6
    with pytest.raises(DomainError):
        functional_response(-1.0, 1e-6)


def test_drift_examples():
    assert drift(0.0, TABLE) == 0.0
    assert drift(1e6, TABLE) == pytest.approx(-1e5, rel=1e-15)
    xi = equilibrium_deterministic(TABLE)
    assert abs(drift(xi, TABLE)) <= 1e-9 * TABLE.N


def test_diffusion_examples():
    p = TABLE.with_(sigma=1e-6)
    assert diffusion(0.0, p) == 0.0
    assert diffusion(p.N, p) == 0.0
    assert diffusion(5e5, p) == pytest.approx(1e-6 * (5e5 / 1.5) * 5e5, rel=1e-14)


def test_threshold_examples():
    th = compute_thresholds(TABLE.with_(gamma=0.0, sigma=1e-7))
    assert th.k0_d == pytest.approx(5.0, rel=1e-12)
    assert th.k0_s == pytest.approx(4.95, rel=1e-12)
    assert th.k0_f == th.k0_d
    assert th.regime_d is Regime.PERSISTENCE

    th = compute_thresholds(TABLE.with_(gamma=2.0, sigma=1e-6))
    assert th.k0_d == pytest.approx(0.5 / 2.1, rel=1e-12)
    assert th.k0_s == pytest.approx(0.0, abs=1e-12)
    assert th.regime_s is Regime.EXTINCTION
    assert not th.sde_extinction_hypothesis  # sigma^2 N = 1e-6 > beta

    th = compute_thresholds(TABLE.with_(gamma=2.0, sigma=5e-7))
    assert th.sde_extinction_hypothesis

    th = compute_thresholds(TABLE.with_(sigma=0.0))
    assert th.k0_s == th.k0_d


def test_equilibrium_deterministic_examples():
    assert equilibrium_deterministic(TABLE) == pytest.approx(666666.67, abs=0.01)
    assert equilibrium_deterministic(TABLE.with_(epsilon=0.0)) == pytest.approx(8e5, rel=1e-12)
    with pytest.raises(NoEquilibriumError):
        equilibrium_deterministic(TABLE.with_(gamma=0.4))


def test_equilibrium_deterministic_decreasing_in_gamma():
    xs = [equilibrium_deterministic(TABLE.with_(gamma=g)) for g in (0, 0.1, 0.2, 0.3)]
    assert all(a > b for a, b in zip(xs, xs[1:]))


def test_lyapunov_limits():
    p = TABLE.with_(sigma=1e-7)
    assert lyapunov_sV(p.N * (1 - 1e-12), p) == pytest.approx(-0.1, rel=1e-6)
    assert lyapunov_sV(1e-6, p) == pytest.approx(0.395, rel=1e-6)
    with pytest.raises(DomainError):
        lyapunov_sV(0.0, p)
    with pytest.raises(DomainError):
        lyapunov_sV(p.N, p)


def _xi_s_mpmath(p, digits=50):
    """Independent high-precision root of the stochastic Lyapunov drift."""
    with mpmath.workdps(digits):
        beta, sig, eps, lam, N = (mpmath.mpf(x) for x in (p.beta, p.sigma, p.epsilon,
                                                          p.gamma + p.mu, p.N))

        def L(R):
            phi = (N - R) / (1 + eps * R)
            return beta * phi - lam - sig**2 * phi**2 / 2

        return float(mpmath.findroot(L, (mpmath.mpf(1), N - 1), solver="anderson"))


def test_equilibrium_stochastic_matches_high_precision_root():
    p = TABLE.with_(sigma=1e-7)
    xi = equilibrium_stochastic(p)
    assert xi == pytest.approx(_xi_s_mpmath(p), rel=1e-11)
    assert xi == pytest.approx(persistence_level_eta(p), rel=1e-9)
    assert abs(lyapunov_sV(xi, p)) <= 1e-10


def test_equilibrium_stochastic_epsilon_zero():
    # phi = N - R when epsilon = 0, so the level is N - eta
    p = TABLE.with_(sigma=1e-7, epsilon=0.0)
    xi = equilibrium_stochastic(p)
    assert xi == pytest.approx(_xi_s_mpmath(p), rel=1e-11)
    assert xi == pytest.approx(799600, rel=1e-5)


def test_equilibrium_stochastic_small_noise_limit():
    p = TABLE.with_(sigma=1e-10)
    assert equilibrium_stochastic(p) == pytest.approx(666666.67, rel=1e-6)


def test_equilibrium_stochastic_errors():
    with pytest.raises(NoEquilibriumError):
        equilibrium_stochastic(TABLE.with_(gamma=2.0, sigma=1e-7))
    with pytest.raises(NoEquilibriumError):
        equilibrium_stochastic(TABLE.with_(sigma=1e-6))  # k0_s = 0


rates = st.floats(0.0, 2.0)
params_persistent = st.builds(
    lambda g, s, b, e: ModelParams(gamma=g, sigma=s, beta=b, epsilon=e),
    rates,
    st.floats(0.0, 5e-6),
    st.floats(1e-7, 2e-6),
    st.floats(0.0, 1e-5),
).filter(lambda p: compute_thresholds(p).k0_d > 1.0 + 1e-9)


@settings(max_examples=1000, deadline=None)
@given(params_persistent)
def test_drift_vanishes_at_equilibrium(p):
    xi = equilibrium_deterministic(p)
    assert 0 < xi < p.N
    assert abs(drift(xi, p)) <= 1e-9 * (p.gamma + p.mu) * p.N


@settings(max_examples=300, deadline=None)
@given(params_persistent)
def test_threshold_identities(p):
    th = compute_thresholds(p)
    assert th.k0_d == th.k0_f
    lam = p.gamma + p.mu
    assert th.k0_s == th.k0_d - p.sigma**2 * p.N**2 / (2 * lam)
    assert th.k0_s <= th.k0_d
    if p.sigma == 0:
        assert th.k0_s == th.k0_d
    elif p.sigma**2 * p.N**2 / (2 * lam) > 4 * math.ulp(th.k0_d):
        assert th.k0_s < th.k0_d
    assert th.xi_d is not None


@settings(max_examples=300, deadline=None)
@given(params_persistent)
def test_boundary_degeneracy(p):
    assert drift(0.0, p) == 0.0
    assert diffusion(0.0, p) == 0.0
    assert diffusion(p.N, p) == 0.0


@settings(max_examples=200, deadline=None)
@given(params_persistent)
def test_stochastic_level_dual_construction(p):
    if compute_thresholds(p).k0_s <= 1 or p.sigma == 0:
        return
    xi = equilibrium_stochastic(p)
    assert 0 < xi < p.N
    assert xi == pytest.approx(persistence_level_eta(p), rel=1e-9)
    assert abs(lyapunov_sV(xi, p)) <= 1e-10 * max(1.0, p.beta * p.N)


def test_xi_d_absent_below_threshold():
    th = compute_thresholds(TABLE.with_(gamma=1.0))
    assert th.xi_d is None and th.xi_s is None
    assert th.regime_d is Regime.EXTINCTION


def test_report_serialises():
    d = compute_thresholds(TABLE.with_(sigma=1e-7)).to_dict()
    assert d["regime_d"] == "Persistence"
    assert np.isfinite(d["xi_s"])
