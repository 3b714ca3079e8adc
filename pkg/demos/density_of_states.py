"""Thouless formula: the log-potential of the density of states is L(E).

Run:  python demos/density_of_states.py
"""
import numpy as np

from qpwind import GOLDEN_ALPHA, FourierPotential, accden_check, amo_potential, free_le, thouless_report
from qpwind.dos import empirical_dos

# free Laplacian, exact exponent available
probes = 3.0 * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
rep = thouless_report(FourierPotential(), GOLDEN_ALPHA, 0.0, 200, 1, probes, L_exact=free_le)
print(f"free, n=200: max |potential - L| = {rep.max_residual:.1e}")

# complexified AMO: the eigenvalues leave the real axis at y = 1
pot = amo_potential(0.5)
mu = empirical_dos(pot, GOLDEN_ALPHA, 1.0, 128, 64)
print(f"{mu.points.size} eigenvalues, |Im| up to {np.abs(mu.points.imag).max():.3f}")
probes = 6.0 * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
rep = thouless_report(pot, GOLDEN_ALPHA, 1.0, 128, 64, probes, mu=mu)
for E, p, L in zip(rep.E_grid[:4], rep.potential_values, rep.L_values):
    print(f"E={E:.3f}  log-potential={p:.4f}  L={L:.4f}")
print(f"max residual over 16 probes: {rep.max_residual:.1e}")

# the integrated accelerations give the same number at height y
r = accden_check(pot, GOLDEN_ALPHA, 3.5, 1.5, 128, 64)
print(f"accden at E=3.5, y=1.5: lhs={r.lhs:.4f} rhs={r.rhs:.4f}")
