"""Physical constants shared across the package.

Values are fixed here rather than pulled from an external table so that
results are bit-reproducible across environments.
"""

HBAR_EV_S = 6.582119e-16      # hbar [eV s]
HBARC_MEV_FM = 197.3269804    # hbar c [MeV fm]
E2_MEV_FM = 1.43997           # e^2 / (4 pi eps0) [MeV fm]
AMU_MEV = 931.494             # atomic mass unit [MeV / c^2]
R0_FM = 1.5                   # nuclear radius parameter, R = R0 * A**(1/3) [fm]
