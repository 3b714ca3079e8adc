"""Lyapunov exponents, accelerations and winding numbers of complexified
quasi-periodic Schrodinger cocycles."""

__version__ = "0.1.0"

from .model import (GOLDEN_ALPHA, CocycleParams, FourierPotential, amo_le_oracle, amo_potential,
                    energy_bound, eval_potential, free_le)
from .cocycle import (LENotConverged, LEResult, averaged_le, converged_le, det_recurrence,
                      finite_le, ldt_deviation_fraction, log_abs_fn, transfer_product)
from .polyalg import LaurentPoly, RootSet, aberth, aberth_roots, annulus_count, jensen_sides
from .accel import (LEProfile, PiecewiseLinear, acceleration_at, fit_quantized, le_profile,
                    regularity_test)
from .winding import ContourZeroError, count_consistency, winding_limit, winding_n
from .zeros import fn_laurent, fn_zeros, zero_circle_report
from .dos import accden_check, empirical_dos, thouless_report, truncated_spectrum

__all__ = [name for name in dir() if not name.startswith("_")]
