"""Caputo fractional model: Adams-Bashforth-Moulton integrator and Mittag-Leffler."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from scipy.special import gammaln, rgamma

from .grid import Engine, TimeGrid, Trajectory
from .model import DomainError, ModelError, ModelParams, compute_thresholds, drift
from .model import fractional_persistence_condition
from .ode import StepSizeError

MAX_POINTS = 10_000_000
SERIES_RADIUS = 10.0
_LOG_SERIES_TOL = math.log(1e-20)
_CANCEL_LIMIT = math.log(1e2)
_MAX_TERMS = 100_000
_SERIES_TERM_BUDGET = 20_000.0
_ASYMPTOTIC_RTOL = 1e-14
# below SERIES_RADIUS the expansion is still tried once x^(1/alpha) is this large
_ASYMPTOTIC_FROM = 40.0


# {{{ Mittag-Leffler

def _check_alpha(alpha: float) -> None:
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")


def _series_float(alpha: float, z: float):
    """Power series in double precision with compensated summation.

    Returns ``(value, log_largest_term)``; the rounding error is roughly
    ``exp(log_largest_term) * 2**-52``. Gives up (value ``nan``) as soon as a
    term exceeds ``_CANCEL_LIMIT`` for negative ``z``.
    """
    if z == 0:
        return 1.0, 0.0
    log_abs = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    terms = [1.0]
    log_big = 0.0
    k = 1
    while k < _MAX_TERMS:
        log_mag = k * log_abs - gammaln(alpha * k + 1)
        if log_mag > log_big:
            log_big = log_mag
            if z < 0 and log_big > _CANCEL_LIMIT:
                return math.nan, _peak_log_term(alpha, log_abs)
        mag = math.exp(log_mag)
        terms.append(mag * sign**k)
        if log_mag <= _LOG_SERIES_TOL + log_big:
            break
        k += 1
    return math.fsum(terms), log_big


def _peak_log_term(alpha: float, log_abs: float) -> float:
    k = np.arange(1, _MAX_TERMS, dtype=float)
    return float(np.max(k * log_abs - gammaln(alpha * k + 1)))


def _series_mp(alpha: float, z: float, digits: int) -> float:
    with mpmath.workdps(digits):
        a = mpmath.mpf(alpha)
        x = mpmath.mpf(z)
        total = mpmath.mpf(1)
        term_pow = mpmath.mpf(1)
        tol = mpmath.mpf(10) ** (-digits)
        k = 1
        while True:
            term_pow *= x
            term = term_pow / mpmath.gamma(a * k + 1)
            total += term
            if abs(term) < tol and a * k > abs(x) ** (1 / a):
                break
            k += 1
        return float(total)


def _asymptotic(alpha: float, x: float):
    """Optimally truncated expansion of ``E_alpha(-x)`` for large ``x``.

    Returns ``(value, error_estimate)``.
    """
    total = 0.0
    prev = math.inf
    log_x = math.log(x)
    terms = []
    for k in range(1, 400):
        r = float(rgamma(1.0 - alpha * k))
        mag = abs(r) * math.exp(-k * log_x)
        if mag > prev and r != 0.0:
            return math.fsum(terms), prev
        terms.append((-1.0) ** (k - 1) * r * math.exp(-k * log_x))
        if r != 0.0:
            prev = mag
        if mag < 1e-18 * abs(math.fsum(terms)) and r != 0.0:
            return math.fsum(terms), mag
    total = math.fsum(terms)
    return total, prev


def _ml_scalar(alpha: float, z: float) -> float:
    if z == 0:
        return 1.0
    if alpha == 1.0:
        try:
            return math.exp(z)
        except OverflowError as exc:
            raise OverflowError(f"E_1({z}) overflows") from exc
    if z > 0:
        # all terms positive: no cancellation; leading growth exp(z^(1/alpha))/alpha
        if z ** (1.0 / alpha) > 709.0:
            raise OverflowError(f"E_{alpha}({z}) overflows double precision")
        value, _ = _series_float(alpha, z)
        return value

    x = -z
    if x > SERIES_RADIUS or x ** (1.0 / alpha) > _ASYMPTOTIC_FROM:
        value, err = _asymptotic(alpha, x)
        if err <= _ASYMPTOTIC_RTOL * abs(value):
            return value
        if x ** (1.0 / alpha) > _SERIES_TERM_BUDGET:
            raise ArithmeticError(f"E_{alpha}({z}): no accurate evaluation route")
    value, log_big = _series_float(alpha, z)
    if not math.isnan(value) and math.exp(log_big) * 2**-52 <= 1e-15 * abs(value):
        return value
    digits = 20 + int(math.ceil(log_big / math.log(10)))
    return _series_mp(alpha, z, digits)


def mittag_leffler(alpha: float, z):
    """One-parameter Mittag-Leffler function ``sum_k z^k / Gamma(alpha k + 1)``.

    Power series (compensated, promoted to extended precision when the terms
    cancel badly) for ``|z| <= 10``; optimally truncated asymptotic expansion
    on the negative axis beyond that, falling back to the extended-precision
    series whenever the truncation error is not negligible. Accepts a scalar
    or an array of real arguments.
    """
    _check_alpha(alpha)
    z_arr = np.asarray(z, dtype=float)
    if z_arr.ndim == 0:
        return _ml_scalar(float(alpha), float(z_arr))
    out = np.empty_like(z_arr)
    for idx, value in np.ndenumerate(z_arr):
        out[idx] = _ml_scalar(float(alpha), float(value))
    return out

# }}}


# {{{ Adams-Bashforth-Moulton

@dataclass(frozen=True)
class CaputoProblem:
    """Initial-value problem ``D^alpha R = f(R)``, ``R(t0) = R0``.

    ``rhs`` defaults to the model drift; pass another (vectorised) callable
    for surrogate problems such as ``f(R) = -lam * R``.
    """

    params: ModelParams
    R0: float
    alpha: float
    grid: TimeGrid
    rhs: Callable | None = None

    def __post_init__(self):
        _check_alpha(self.alpha)

    def f(self, R):
        if self.rhs is None:
            return drift(R, self.params)
        return self.rhs(R)


def _pow_diff(m: np.ndarray, q: float) -> np.ndarray:
    """``(m + 1)**q - m**q`` without cancellation for large ``m``."""
    out = np.empty_like(m)
    zero = m == 0
    out[zero] = 1.0
    mm = m[~zero]
    out[~zero] = mm**q * np.expm1(q * np.log1p(1.0 / mm))
    return out


def abm_weights(alpha: float, h: float, n_steps: int):
    """Predictor weights ``b[m]`` (m = n - j) and corrector weights.

    Returns ``(b, a_mid, a0)`` where, for the step to ``t_{n+1}``,
    ``b[n - j]`` multiplies ``f_j`` (j = 0..n), ``a_mid[n - j]`` multiplies
    ``f_j`` (j = 1..n) and ``a0[n]`` multiplies ``f_0``. The Gamma-function
    prefactors are *not* included.
    """
    m = np.arange(n_steps + 2, dtype=float)
    d_alpha = _pow_diff(m, alpha)            # (m+1)^a - m^a
    d_alpha1 = _pow_diff(m, alpha + 1.0)     # (m+1)^(a+1) - m^(a+1)
    b = h**alpha / alpha * d_alpha[: n_steps + 1]
    c = h**alpha / (alpha * (alpha + 1.0))
    a_mid = c * (d_alpha1[1 : n_steps + 1] - d_alpha1[:n_steps])
    n = m[: n_steps + 1]
    a0 = c * (n ** (alpha + 1.0) - (n - alpha) * (n + 1.0) ** alpha)
    return b, a_mid, a0, c


def integrate_caputo(prob: CaputoProblem, check_domain: bool | None = None) -> Trajectory:
    """Full-memory fractional Adams-Bashforth-Moulton (PECE) on a uniform grid.

    O(n^2) work. With the model drift every value must stay in (0, N);
    a step leaving it raises :class:`StepSizeError`.
    """
    p, R0, alpha, grid = prob.params, float(prob.R0), float(prob.alpha), prob.grid
    if check_domain is None:
        check_domain = prob.rhs is None
    if not 0 < R0 < p.N:
        raise DomainError(f"R0 must lie in (0, N={p.N:g}), got {R0}")
    if grid.n_points > MAX_POINTS:
        raise ModelError(f"grid has {grid.n_points} points; limit is {MAX_POINTS}")

    n_steps = grid.n_steps
    b, a_mid, a0, c = abm_weights(alpha, grid.dt, n_steps)
    inv_gamma = 1.0 / math.gamma(alpha)
    b = b * inv_gamma
    a_mid = a_mid * inv_gamma
    a0 = a0 * inv_gamma
    c_last = c * inv_gamma

    y = np.empty(n_steps + 1)
    f = np.empty(n_steps + 1)
    y[0] = R0
    f[0] = prob.f(R0)
    N = p.N
    h = grid.dt
    running = f[0]  # alpha == 1: all memory weights equal h, so sums suffice
    for n in range(n_steps):
        if alpha == 1.0:
            pred = R0 + h * running
            y_next = R0 + h * (running - 0.5 * f[0]) + c_last * prob.f(pred)
        else:
            pred = R0 + np.dot(b[n::-1], f[: n + 1])
            hist = a0[n] * f[0]
            if n:
                hist += np.dot(a_mid[n - 1 :: -1], f[1 : n + 1])
            y_next = R0 + hist + c_last * prob.f(pred)
        if check_domain and not (0.0 < y_next < N):
            raise StepSizeError(
                f"fractional step to t={grid.t0 + (n + 1) * grid.dt:g} left (0, N)",
                suggested_dt=grid.dt / 2,
            )
        y[n + 1] = y_next
        f[n + 1] = prob.f(y_next)
        running += f[n + 1]

    meta = {"alpha": alpha, "scheme": "ABM-PECE full memory"}
    if prob.rhs is None:
        k0_f = compute_thresholds(p).k0_f
        meta["k0_f"] = k0_f
        # invariance holds on (0, N) in practice; the stated interval is (0, k0_f)
        meta["R0_in_stated_invariance_interval"] = bool(0 < R0 < k0_f)
        meta["persistence_condition"] = fractional_persistence_condition(p)
    return Trajectory(grid.times(), y, p, Engine.FDE, meta=meta)


def solve_caputo(
    p: ModelParams, R0: float, grid: TimeGrid, alpha: float | None = None
) -> Trajectory:
    """Convenience wrapper: model drift, order from ``alpha`` or ``p.alpha``."""
    alpha = p.alpha if alpha is None else alpha
    return integrate_caputo(CaputoProblem(p.with_(alpha=alpha), R0, alpha, grid))

# }}}
