"""Decoherence outruns dissipation for a hot Brownian particle.

We integrate the Caldeira-Leggett master equation on a 128-point grid, fit
the decay of the off-diagonal band at separation s and compare the ratio of
relaxation to decoherence time with 2 M k_B T s^2 / hbar^2. The prediction
assumes the decoherence term dominates, so agreement improves with T. A cold strongly
damped run then shows the equation's known failure to keep rho positive.
"""

from entarrow.caldeira_leggett import (
    CLParameters,
    PositionGrid,
    ground_state,
    integrate,
    positivity_min_eig,
    stable_dt,
    timescales,
)

grid = PositionGrid.spanning(5.0, 128)
s = 13 * grid.spacing

for T in (5.0, 20.0, 50.0 / s**2):
    params = CLParameters(gamma=1.0, T=T, omega=1.0)
    t_final = min(0.5, 3.0 / (params.decoherence_rate * s**2))
    traj = integrate(ground_state(grid, params), params, t_final, stable_dt(grid, params), save_every=5)
    ts = timescales(traj, params, s)
    print(f"T = {T:7.3f}: tau_R/tau_D = {ts.ratio:8.3f}, predicted {params.timescale_ratio(s):8.3f}")

cold = CLParameters(gamma=0.5, T=0.5, omega=1.0)
traj = integrate(ground_state(grid, cold), cold, 0.5, stable_dt(grid, cold), save_every=100)
print("cold, strongly damped run, smallest eigenvalue per snapshot:")
for state in traj:
    print(f"  t = {state.t:.3f}  {positivity_min_eig(state): .3e}")
