"""Zeros of z -> f_n(E, z) line up on the circles |z| = exp(+-gamma).

Writes zeros.csv (re, im, -log|z|) next to the script for plotting.
Run:  python demos/zero_circles.py
"""
import math
from pathlib import Path

import numpy as np

from qpwind import GOLDEN_ALPHA, amo_potential, converged_le, fn_zeros
from qpwind.accel import PiecewiseLinear
from qpwind.zeros import symmetry_check, zero_circle_report

pot = amo_potential(0.5)
E, n = 3.5, 100
L0 = converged_le(pot, GOLDEN_ALPHA, E, 0.0, tol=1e-4).value
gamma = L0 + math.log(2)

rs = fn_zeros(pot, GOLDEN_ALPHA, E, n)
print(f"{len(rs)} zeros, worst residual {rs.residuals.max():.1e}, converged={rs.converged}")

ys = -np.log(np.abs(rs.roots))
hist, edges = np.histogram(ys, bins=np.linspace(-2.5, 2.5, 21))
for h, lo in zip(hist, edges):
    print(f"{lo:+5.2f} {'#' * int(h // 2)}")

pl = PiecewiseLinear((gamma,), (0, 1), L0, 0.0, 2.5, 0.0)
rep = zero_circle_report(pot, GOLDEN_ALPHA, E, n, pl, 0.05, rs=rs)
print("fractions per circle:", [(round(g, 4), f) for g, f in rep.fractions])
print("z -> 1/conj(z) symmetry:", symmetry_check(rs, 1e-6))

out = Path(__file__).with_name("zeros.csv")
np.savetxt(out, np.column_stack([rs.roots.real, rs.roots.imag, ys]), delimiter=",",
           header="re,im,neg_log_abs", comments="", fmt="%.17g")
print("wrote", out)
