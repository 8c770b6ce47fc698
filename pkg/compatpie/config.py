import logging
import os
from typing import Final

from compatpie.errors import InvalidSpecError

THREADS_ENV: Final[str] = "COMPAT_THREADS"
TRACE_ENV: Final[str] = "COMPATPIE_TRACE_ENABLED"
LOG_LEVEL_ENV: Final[str] = "COMPATPIE_LOG_LEVEL"

# exact inference
ROOT_XTOL: Final[float] = 1e-8  # on log(psi)
LOG_PSI_CAP: Final[float] = 700.0
PEARSON_LOG_PSI_CAP: Final[float] = 50.0
ESTIMATE_AGREEMENT_TOL: Final[float] = 1e-6
MINIMUM_LIKELIHOOD_RTOL: Final[float] = 1e-7

# compatibility curves
POINTS_PER_DECADE: Final[int] = 200
GRID_SPAN: Final[float] = 64.0

# logistic fitting / prior data
IRLS_TOL: Final[float] = 1e-10
IRLS_MAX_ITER: Final[int] = 100
IRLS_MAX_HALVINGS: Final[int] = 30
PSEUDO_NONCASES: Final[float] = 1e6

# simulation
DEFAULT_SIMS: Final[int] = 10_000
CHUNK_SIZE: Final[int] = 1_000
CACHE_SIZE: Final[int] = 65_536

# display
P_DIGITS: Final[int] = 3
OR_DIGITS: Final[int] = 2
S_DIGITS: Final[int] = 1


def threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise InvalidSpecError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if value < 0:
        raise InvalidSpecError(f"{THREADS_ENV} must be >= 0, got {value}")
    if value == 0:
        return os.cpu_count() or 1
    return value


def trace_enabled() -> bool:
    return bool(os.environ.get(TRACE_ENV, None))


def log_level() -> int:
    name = os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING
