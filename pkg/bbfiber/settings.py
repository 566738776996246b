"""
Process-level settings for the bang-bang fiber toolkit.

Values are read from the environment (or a .env file) through python-decouple,
so sweeps can be resized without touching code.
"""

from decouple import config

# Fock truncation: occupations 0..d-1 per mode
DIM_PER_MODE = config("BBFIBER_DIM_PER_MODE", default=4, cast=int)

# Hard cap on the dense total dimension d**num_modes
MAX_DIMENSION = config("BBFIBER_MAX_DIMENSION", default=4096, cast=int)

# Largest exponent accepted in a monomial term
EXPONENT_CAP = config("BBFIBER_EXPONENT_CAP", default=4, cast=int)

# Monte-Carlo ensemble size for inhomogeneous runs
ENSEMBLE_SIZE = config("BBFIBER_ENSEMBLE_SIZE", default=200, cast=int)

# Sequence search limits
SEARCH_MAX_STATES = config("BBFIBER_SEARCH_MAX_STATES", default=2_000_000, cast=int)
SEARCH_RESULT_CAP = config("BBFIBER_SEARCH_RESULT_CAP", default=64, cast=int)

# Relative tolerance requested from scipy quadrature
QUAD_EPSREL = config("BBFIBER_QUAD_EPSREL", default=1e-10, cast=float)

LOG_LEVEL = config("BBFIBER_LOG_LEVEL", default="WARNING")

OUTPUT_DIR = config("BBFIBER_OUTPUT_DIR", default="output")
