"""Deterministic runs: extinction from near-full resistance, persistence from one cell."""

from amrtriad import ModelParams, TimeGrid, classify_outcome, integrate_ode

p = ModelParams()
for gamma in (1.0, 1.5, 2.0):
    traj = integrate_ode(p.with_(gamma=gamma), p.N - 1, TimeGrid(0.0, 50.0, 0.01))
    print(f"gamma={gamma}: R(50)={traj.terminal_value:.3e} {classify_outcome(traj).kind.value}")
for gamma in (0.0, 0.2):
    traj = integrate_ode(p.with_(gamma=gamma), 1.0, TimeGrid(0.0, 200.0, 0.01))
    out = classify_outcome(traj)
    print(f"gamma={gamma}: R(200)={traj.terminal_value:.1f} {out.kind.value}")
