"""Winding differences count zeros in annuli; Jensen's formula checks the
same count through circle means of log|p|.

Run:  python demos/counting_zeros.py
"""
import numpy as np

from qpwind import GOLDEN_ALPHA, LaurentPoly, amo_potential, count_consistency, fn_zeros, jensen_sides

pot = amo_potential(0.5)
for n in (20, 60):
    roots = fn_zeros(pot, GOLDEN_ALPHA, 3.5, n)
    for y1, y2 in [(-2.5, -1.0), (0.5, 1.83), (-3.0, 3.0)]:
        chk = count_consistency(pot, GOLDEN_ALPHA, 3.5, y1, y2, n, roots)
        print(f"n={n:3d}  ({y1:+.2f}, {y2:+.2f})  2n*dnu, 2*count = {chk.doubled_counts}")

rng = np.random.default_rng(0)
z = np.exp(rng.uniform(-1, 1, 30)) * np.exp(2j * np.pi * rng.random(30))
p = LaurentPoly(-2, np.poly(z)[::-1], trim_rel=0.0)
js = jensen_sides(p, 0.7, 1.3)
print(f"Jensen on 0.7 <= |z| <= 1.3: lhs={js.lhs:.12f} rhs={js.rhs:.12f} ({js.quadrature_points} nodes)")
