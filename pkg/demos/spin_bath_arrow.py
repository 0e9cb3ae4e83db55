"""A qubit decoheres by entangling with a bath of spins, and the process runs backwards too.

The overlap of the two conditional bath states falls roughly like
exp(-c n_env t^2), so bigger baths decohere faster. Reversing the evolution
undoes the entanglement exactly, since the total evolution is unitary.
"""

import numpy as np

from entarrow import Factorization
from entarrow.dynamics import (
    NOT_REACHED,
    analytic_overlap,
    bath_initial_state,
    build_spin_bath,
    decoherence_time,
    entanglement_trajectory,
    environment_overlap,
    evolve,
)

times = np.linspace(0.0, 2.0, 401)
print("n_env  crossing time of |r| = 0.05")
for n_env in (2, 4, 6, 8, 10):
    model, H = build_spin_bath(n_env, seed=0)
    r = environment_overlap(model, H, times)
    t_dec = decoherence_time(list(zip(times, r)), 0.05)
    shown = "not reached" if t_dec is NOT_REACHED else f"{t_dec:.4f}"
    err = np.max(np.abs(np.abs(r) - np.abs(analytic_overlap(model.couplings, times))))
    print(f"{n_env:5d}  {shown:>10}   (max deviation from cos product {err:.1e})")

model, H = build_spin_bath(8, seed=0)
psi0 = bath_initial_state(8)
cut = Factorization.identity((2, 256))
s = entanglement_trajectory(psi0, H, cut, times[::50])
print("S_ent along the way:", np.round(s, 4))

later = evolve(psi0, H, 2.0)
back = evolve(later, H, -2.0)
print("after running backwards:", entanglement_trajectory(back, H, cut, [0.0])[0])
