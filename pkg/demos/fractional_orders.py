"""Caputo runs across fractional orders, plus a Mittag-Leffler spot check."""

import math

from amrtriad import ModelParams, TimeGrid, equilibrium_deterministic, mittag_leffler
from amrtriad import solve_caputo, time_to_band

print(f"E_1(-1) = {mittag_leffler(1.0, -1.0):.12f}  exp(-1) = {math.exp(-1):.12f}")
p = ModelParams(gamma=1.5)
for alpha in (0.5, 0.6, 0.7, 0.8):
    r10 = solve_caputo(p, p.N - 1, TimeGrid(0.0, 10.0, 0.01), alpha=alpha).terminal_value
    print(f"alpha={alpha}: R(10)={r10:.0f}")

q = ModelParams(gamma=0.2)
xi = equilibrium_deterministic(q)
for alpha in (0.7, 0.8):
    t_hit, _ = time_to_band(q, 1.0, alpha, xi, 0.01)
    print(f"alpha={alpha}: within 1% of {xi:.0f} from t={t_hit:.1f}")
