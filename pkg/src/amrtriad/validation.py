"""Quick oracle checks that each engine agrees with an independent reference."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx

from .fde import CaputoProblem, integrate_caputo, mittag_leffler, solve_caputo
from .grid import TimeGrid
from .model import (
    ModelParams,
    compute_thresholds,
    equilibrium_deterministic,
    equilibrium_stochastic,
    persistence_level_eta,
)
from .ode import integrate_euler, integrate_ode
from .sde import euler_maruyama


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def check_thresholds() -> Check:
    th = compute_thresholds(ModelParams(gamma=0.0, sigma=1e-7))
    err = max(_rel(th.k0_d, 5.0), _rel(th.k0_f, 5.0), _rel(th.k0_s, 4.95))
    return Check("thresholds closed form", err <= 1e-12, f"max rel err {err:.2e}")


def check_persistence_levels() -> Check:
    p = ModelParams(gamma=0.0, sigma=1e-7)
    a, b = equilibrium_stochastic(p), persistence_level_eta(p)
    err = _rel(a, b)
    return Check("stochastic level: bisection vs eta", err <= 1e-9,
                 f"{a:.6f} vs {b:.6f} (rel {err:.1e})")


def check_mittag_leffler() -> Check:
    # E_1(-x) = exp(-x) and E_1/2(-x) = exp(x^2) erfc(x)
    xs = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 12.0])
    e1 = max(_rel(mittag_leffler(1.0, -x), math.exp(-x)) for x in xs)
    e_half = max(_rel(mittag_leffler(0.5, -x), float(erfcx(x))) for x in xs)
    err = max(e1, e_half)
    return Check("Mittag-Leffler special cases", err <= 1e-12, f"max rel err {err:.1e}")


def check_fractional_linear() -> Check:
    alpha, lam = 0.7, 0.1
    grid = TimeGrid(0.0, 1.0, 1e-3)
    prob = CaputoProblem(ModelParams(), 1.0, alpha, grid, rhs=lambda R: -lam * R)
    got = integrate_caputo(prob).terminal_value
    exact = mittag_leffler(alpha, -lam)
    err = _rel(got, exact)
    return Check("Caputo linear surrogate vs Mittag-Leffler", err <= 1e-3, f"rel err {err:.1e}")


def check_fractional_alpha_one() -> Check:
    p = ModelParams(gamma=0.2)
    grid = TimeGrid(0.0, 20.0, 1e-3)
    a = solve_caputo(p, 1000.0, grid, alpha=1.0).values
    b = integrate_ode(p, 1000.0, grid).values
    err = float(np.max(np.abs(a - b) / b))
    return Check("Caputo at alpha = 1 vs RK4", err <= 1e-4, f"max rel err {err:.1e}")


def check_em_vs_euler() -> Check:
    p = ModelParams(gamma=0.2, sigma=0.0)
    grid = TimeGrid(0.0, 20.0, 0.01)
    zeros = [np.zeros((1, grid.n_steps))]
    em, _ = euler_maruyama(p, 1000.0, grid.dt, zeros)
    ref = integrate_euler(p, 1000.0, grid).values
    err = float(np.max(np.abs(em[0] - ref) / ref))
    return Check("Euler-Maruyama with sigma = 0 vs explicit Euler", err <= 1e-12,
                 f"max rel err {err:.1e}")


def check_rk4_order() -> Check:
    p = ModelParams(gamma=0.2)
    ref = integrate_ode(p, 1000.0, TimeGrid(0.0, 40.0, 1e-3)).terminal_value
    errs = [abs(integrate_ode(p, 1000.0, TimeGrid(0.0, 40.0, h)).terminal_value - ref)
            for h in (0.8, 0.4, 0.2)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    return Check("RK4 observed order", min(orders) >= 3.5,
                 "orders " + ", ".join(f"{o:.2f}" for o in orders))


def check_ode_equilibrium() -> Check:
    p = ModelParams(gamma=0.1)
    got = integrate_ode(p, 1.0, TimeGrid(0.0, 200.0, 0.01)).terminal_value
    xi = equilibrium_deterministic(p)
    err = _rel(got, xi)
    return Check("ODE approaches the interior equilibrium", err <= 1e-3, f"rel err {err:.1e}")


CHECKS = (
    check_thresholds,
    check_persistence_levels,
    check_mittag_leffler,
    check_fractional_linear,
    check_fractional_alpha_one,
    check_em_vs_euler,
    check_rk4_order,
    check_ode_equilibrium,
)


def run_all() -> list[Check]:
    results = []
    for fn in CHECKS:
        start = time.perf_counter()
        try:
            c = fn()
        except Exception as exc:  # a crashing oracle is a failed oracle
            c = Check(fn.__name__, False, f"{type(exc).__name__}: {exc}")
        results.append(Check(c.name, c.passed, c.detail, time.perf_counter() - start))
    return results
