"""Physical constants (2019 SI exact values)."""

TWO_PI = 6.283_185_307_179_586_476_925_287

PLANCK = 6.626_070_15e-34  # J s, exact by definition
HBAR = PLANCK / TWO_PI  # J s
K_B = 1.380_649e-23  # J / K, exact by definition
