"""The degenerate fractional diffusion, solved pseudospectrally.

Shows mass conservation, the maximum principle, and how the density
exponent changes the relaxation speed.  Where the equation is linear,
the solver is compared against the exact multiplier flow.

Run:  python3 demos/06_pde_solver.py
"""

import numpy as np

from fpmex.measures import ProfileSpec
from fpmex.pde import exact_linear_solution, solve_fpme, stable_step

prof = ProfileSpec(kind="bump", background=0.3, center=1.0, width=0.35, height=0.4)
times = np.linspace(0.0, 0.6, 7)

print("stable step sizes at grid 512:")
for m in (1, 2, 3):
    print(f"  m={m}: dt <= {stable_step(1.0, m, 2.0, 512):.2e}")
print()

for m in (1, 2):
    sol = solve_fpme(prof, 1.0, m, times, grid_size=512)
    masses = sol.values.mean(axis=1)
    spread = sol.values.max(axis=1) - sol.values.min(axis=1)
    print(f"m={m}:")
    for t, mass, s in zip(times, masses, spread):
        print(f"  t={t:4.2f}  mass={mass:.12f}  max-min={s:.5f}")
    print()

sol = solve_fpme(prof, 1.0, 1, [0.5], grid_size=512)
ref = exact_linear_solution(prof, 1.0, [0.5], 2.0, 512)
print(f"linear case vs exact flow: sup error {np.max(np.abs(sol.values - ref.values)):.2e}")
