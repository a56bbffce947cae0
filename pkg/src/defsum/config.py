"""Numerical defaults and environment lookups."""

import os

try:
    from .errors import ConfigError
except ImportError:
    from errors import ConfigError

# Limit detection (detect_limit defaults)
DETECT_TOL = 1e-8
DETECT_WINDOW = 16
DETECT_HORIZON = 10_000
DIVERGENCE_BOUND = 1e12
OSCILLATION_FACTOR = 1e3  # oscillation floor = factor * tol

# Membership tests: sigma_p^q[s], d-/sigma-duals, summability domains
MEMBER_TOL = 1e-3
MEMBER_WINDOW = 16
MEMBER_HORIZON = 10_000

# "T_n -> 0" decisions: criteria, section tests, sigma_p^q[K] tests
CRITERION_TOL = 1e-2
CRITERION_WINDOW = 16
CRITERION_HORIZON = 200
# A converged nonzero trace still counts as falling toward 0 when
# mean|T| near the horizon is below this fraction of mean|T| near half the horizon.
DECAY_RATIO = 2 ** -0.25

# Norms
DEFAULT_TRUNC = 1000
EXACT_TOL = 1e-12  # truncation error below which a norm is reported exact
TAIL_EPS = 1e-15   # numeric row tails stop once the geometric bound drops below this

# Algebraic identity suites
IDENTITY_TOL = 1e-10
SUITE_TOL = 1e-3
SUITE_HORIZON = 10_000

# Sampled falsifier for the l_infinity criterion
LINF_EPSILONS = (0.5, 0.1, 0.01)
LINF_LENGTHS = (1, 2, 4, 8)
LINF_SAMPLES = 8
LINF_SEED = 0

# Row search cap for catalog settle indices
SETTLE_SEARCH_LIMIT = 10_000_000

# Output
TRACE_DIGITS = 12
TRACE_FILE = "trace.csv"
SUMMARY_FILE = "summary.txt"
DEFAULT_OUT_DIR = "out"

# Exit status contract
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILS = 3
EXIT_INCONCLUSIVE = 4

# Parallelism
THREADS_ENV = "DEFSUM_THREADS"
DEFAULT_THREADS = 1


def thread_limit() -> int:
    """Return the worker cap from DEFSUM_THREADS (default 1).

    Raises:
        ConfigError: if the variable is set but is not a positive integer.
    """
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return DEFAULT_THREADS
    if not raw.isdigit() or int(raw) < 1:
        raise ConfigError(THREADS_ENV, f"must be a positive integer, got {raw!r}")
    return int(raw)
