"""Physical constants and reference parameters shared across modules."""

import numpy as np
from scipy import constants as _c

HBAR = _c.hbar
H_PLANCK = _c.h
E_CHARGE = _c.e
K_B = _c.k
AMU = _c.physical_constants["atomic mass constant"][0]

TWO_PI = 2.0 * np.pi

#: quantum resistance hbar / (2e)^2, about 1.03 kOhm
R_K = HBAR / (2.0 * E_CHARGE) ** 2

#: flux-to-phase conversion hbar / 2e
PHI0_REDUCED = HBAR / (2.0 * E_CHARGE)

MASS_BE9 = 9.0121831 * AMU
MASS_CA43 = 42.9587666 * AMU
