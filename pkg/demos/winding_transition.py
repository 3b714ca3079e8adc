"""The winding number of f_n(E, x + iy) jumps exactly at the kink of L(E, iy).

Run:  python demos/winding_transition.py
"""
import math

from qpwind import CocycleParams, GOLDEN_ALPHA, amo_potential, converged_le, winding_limit, winding_n

pot = amo_potential(0.5)
E = 3.5
L0 = converged_le(pot, GOLDEN_ALPHA, E, 0.0, tol=1e-4).value
gamma = L0 + math.log(2)
print(f"L(E, i0) = {L0:.5f}; expected transition at y = {gamma:.5f}")

# finite-n winding, nu_n = -W/n, across the transition
for y in (0.5, 1.0, 1.6, 1.78, 1.87, 2.1, 2.5):
    r = winding_n(pot, CocycleParams(GOLDEN_ALPHA, E, y, 1000))
    print(f"y={y:4.2f}  nu_n={float(r.nu_n):+.3f}  (grid {r.grid_used})")

# one-sided limits at the transition itself
for side in "-+":
    print(f"limit from {side}: {winding_limit(pot, GOLDEN_ALPHA, E, gamma, side)}")
