"""Numerical laboratory for radial solutions of quasilinear elliptic systems."""

__version__ = "0.1.0"

from .exponents import (Kind, SystemParams, classify_regimes, compute_exponents,  # noqa: E402
                        particular_coefficients)
from .radial import ScalarParams, solve_regular, solve_scalar  # noqa: E402

__all__ = ["Kind", "SystemParams", "ScalarParams", "compute_exponents", "classify_regimes",
           "particular_coefficients", "solve_regular", "solve_scalar", "__version__"]
