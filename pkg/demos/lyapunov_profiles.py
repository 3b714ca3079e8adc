"""Lyapunov exponent of the complexified almost-Mathieu cocycle as y grows.

Run:  python demos/lyapunov_profiles.py
"""
import math

import numpy as np

from qpwind import GOLDEN_ALPHA, amo_potential, converged_le, fit_quantized, le_profile
from qpwind.accel import slope_deviations

lam = 0.5
pot = amo_potential(lam)

# At E = 0 (inside the spectrum) the exponent is flat at 0 until log(lam) + y
# takes over.  Compare a few heights with that formula.
for y in (0.0, 0.5, 1.0, 1.5):
    r = converged_le(pot, GOLDEN_ALPHA, 0.0, y, tol=1e-3)
    print(f"E=0  y={y:3.1f}  L={r.value:.4f}  max(log lam + y, 0)={max(math.log(lam) + y, 0):.4f}")

# Outside the spectrum the flat part sits at L(E, i0) > 0.  The profile is
# convex with integer slopes; the kink is where log(lam) + y catches up.
for E in (3.5, 4.0, 2 + 2j):
    prof = le_profile(pot, GOLDEN_ALPHA, E, 0.0, 2.5, 26, tol=1e-3)
    pl = fit_quantized(prof)
    L0 = prof.L_values[0]
    dev = slope_deviations(prof, pl)
    print(f"E={E!s:7}  slopes={pl.slopes}  kink={pl.breakpoints[0]:.4f}  "
          f"L0+log2={L0 + math.log(2):.4f}  worst slope error={dev.max():.1e}")

# secant slopes before rounding, for the E = 3.5 profile
prof = le_profile(pot, GOLDEN_ALPHA, 3.5, 0.0, 2.5, 26, tol=1e-3)
print(np.round(np.diff(prof.L_values) / np.diff(prof.y_grid), 3))
