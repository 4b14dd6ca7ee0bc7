"""Print threshold numbers and equilibria across the gamma sweep."""

from amrtriad import ModelParams, compute_thresholds, equilibrium_deterministic, equilibrium_stochastic
from amrtriad.model import NoEquilibriumError

base = ModelParams(sigma=1e-7)
print(f"{'gamma':>6} {'K0d':>10} {'K0s':>10} {'xi_d':>12} {'xi_s':>12}")
for gamma in (0.0, 0.1, 0.2, 0.3, 0.4, 1.0, 1.5, 2.0):
    p = base.with_(gamma=gamma)
    th = compute_thresholds(p)
    try:
        xi_d = f"{equilibrium_deterministic(p):12.2f}"
    except NoEquilibriumError:
        xi_d = f"{'-':>12}"
    try:
        xi_s = f"{equilibrium_stochastic(p):12.2f}"
    except NoEquilibriumError:
        xi_s = f"{'-':>12}"
    print(f"{gamma:6.2f} {th.k0_d:10.6f} {th.k0_s:10.6f} {xi_d} {xi_s}")
