# config.py
import os
from dotenv import load_dotenv

load_dotenv()

ENV_PREFIX = "COMPACTON_"


def get_config_value(key, default=None):
    """Get a setting from the environment (a .env file is honoured)"""
    return os.getenv(ENV_PREFIX + key, default)


def get_int(key, default):
    value = get_config_value(key)
    return default if value in (None, "") else int(value)


def get_float(key, default):
    value = get_config_value(key)
    return default if value in (None, "") else float(value)


def get_bool(key, default=False):
    value = get_config_value(key)
    if value in (None, ""):
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


# Quadrature / root finding
QUAD_TOL = get_float("QUAD_TOL", 1e-12)
QUAD_LIMIT = get_int("QUAD_LIMIT", 200)
ROOT_TOL = get_float("ROOT_TOL", 1e-14)
BISECTION_STEPS = get_int("BISECTION_STEPS", 64)

# Profile evaluation
ENDPOINT_BAND = get_float("ENDPOINT_BAND", 1e-6)
PROFILE_SAMPLES = get_int("PROFILE_SAMPLES", 1001)

# Transformed operators
GRID_POINTS = get_int("GRID_POINTS", 4001)
GRID_MAX_DOUBLINGS = get_int("GRID_MAX_DOUBLINGS", 4)
REFINE_TOL = get_float("REFINE_TOL", 1e-7)
POTENTIAL_CUTOFF = get_float("POTENTIAL_CUTOFF", 1e-12)
ZERO_BAND_FACTOR = get_float("ZERO_BAND_FACTOR", 10.0)
LOWEST_EIGENPAIRS = get_int("LOWEST_EIGENPAIRS", 3)

# Stability
MARGINAL_TOL = get_float("MARGINAL_TOL", 1e-9)
FD_DELTA = get_float("FD_DELTA", 1e-4)

# Variational oracle
VARIATIONAL_POINTS = get_int("VARIATIONAL_POINTS", 2001)
VARIATIONAL_MAX_ITER = get_int("VARIATIONAL_MAX_ITER", 20000)
VARIATIONAL_TOL = get_float("VARIATIONAL_TOL", 1e-8)
VARIATIONAL_MAX_STEP = get_float("VARIATIONAL_MAX_STEP", 10.0)

# Runtime
WORKERS = get_int("WORKERS", 1)
VERBOSE = get_bool("VERBOSE", False)
