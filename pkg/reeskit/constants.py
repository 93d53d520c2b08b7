"""Application constants"""

VERSION = "1.0.0"

# Environment variable names read by reeskit.config
ENV_GB_STEP_BUDGET = "REES_GB_STEP_BUDGET"
ENV_CELL_BUDGET = "REES_CELL_BUDGET"
ENV_WALL_CLOCK_SECONDS = "REES_WALL_CLOCK_SECONDS"
ENV_THREADS = "REES_THREADS"
ENV_LOG_LEVEL = "REES_LOG_LEVEL"

DEFAULT_GB_STEP_BUDGET = 200_000
DEFAULT_CELL_BUDGET = 500_000
DEFAULT_WALL_CLOCK_SECONDS = 0.0
DEFAULT_THREADS = 1
DEFAULT_LOG_LEVEL = "WARNING"

# Degree up to which a cutter is probed for being a zero-divisor
ZERO_DIVISOR_PROBE_DEGREE = 3

DEFAULT_DOMAIN_DEGREE = 2
DEFAULT_MULTIPLICATIVITY_PAIRS = 100
DEFAULT_MULTIPLICATIVITY_DEGREE = 3
DEFAULT_SEED = 0

# The cubic threefold degeneration shipped as the end-to-end scenario
EXAMPLE_41_CUBIC = "u^3 - v^3 + (u+v)*w^2 + x^3 + y^3 + y*z^2"
EXAMPLE_41_INITIAL_IDEAL = "(x^3 + y^3 + y*z^2)"
EXAMPLE_41_FLATNESS_INDEX_BOUND = 4

EXAMPLE_41_JOB = {
    "ring": {"vars": ["u", "v", "w", "x", "y", "z"]},
    "relations": [EXAMPLE_41_CUBIC],
    "cutters": ["u", "v"],
    "weight": [1, 1, 0, 0, 0, 0],
    "alphas": [[1, 1], [1, 2], [2, 3], [3, 5]],
    "window": {"N": 6, "W": [0, 6]},
    "domain_degree": DEFAULT_DOMAIN_DEGREE,
    "seed": DEFAULT_SEED,
}
