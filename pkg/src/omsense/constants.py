"""Physical constants and unit conversions (SI throughout, CODATA 2018)."""

import math

HBAR = 1.054571817e-34      # J s
K_B = 1.380649e-23          # J / K
C_LIGHT = 299792458.0       # m / s

GEV_PER_CM3_TO_KG_M3 = 1.78266192e-27 * 1e6   # (GeV/c^2)/cm^3 -> kg/m^3
RHO_DM_DEFAULT = 0.4 * GEV_PER_CM3_TO_KG_M3   # local dark-matter density, kg/m^3

YEAR_S = 365.25 * 86400.0   # Julian year, s

# Virialized-halo rule: the stochastic drive decoheres over ~1e6 cycles,
# so the drive linewidth defaults to 1e-6 of the Compton frequency.
VIRIAL_LINEWIDTH_FRACTION = 1e-6

TWO_PI = 2.0 * math.pi
