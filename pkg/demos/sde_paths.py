"""A seeded stochastic path and a small ensemble summary."""

import numpy as np

from amrtriad import ModelParams, NoisePlan, TimeGrid, equilibrium_stochastic, level_crossings
from amrtriad import simulate_ensemble, simulate_path

p = ModelParams(sigma=1e-7)
path = simulate_path(p, 1.0, TimeGrid(0.0, 300.0, 0.01), NoisePlan(42))
xi_s = equilibrium_stochastic(p)
print(f"xi_s={xi_s:.2f}  R(300)={path.terminal_value:.1f}  "
      f"crossings in [100,300]: {level_crossings(path.window(100.0, 300.0), xi_s)}")

ens = simulate_ensemble(p.with_(gamma=2.0, sigma=5e-7), p.N - 1, TimeGrid(0.0, 50.0, 1e-3), 50,
                        base_seed=0, store_every=10)
print(f"extinction ensemble: {np.mean(ens.values[:, -1] < 1):.0%} of paths below 1 at t=50")
