"""Toolkit defaults, budgets and environment overrides"""

import os

# Budgets - every exact routine checks its cost against one of these
NAIVE_ITERATION_BUDGET = 10**9        # X^(2s) pairs for the brute-force oracle
TABLE_MULTISET_BUDGET = 10**8         # multisets enumerated by the table builder
SERIES_TERM_BUDGET = 10**9            # q^4 work for one complete-sum table
DENSITY_LEVEL_BUDGET = 10**10         # p^(4H) work for one density level
EXACT_TERM_BUDGET = 10**8            # s q^4 work for one exact series term
GRID_POINT_BUDGET = 5 * 10**7         # points in one Fourier grid or quadrature tensor
HENSEL_SAMPLE_BUDGET = 2 * 10**6      # random candidates tried per modulus

# Enumeration
MULTISET_CHUNK = 1 << 16
PARTITION_BATCH = 8

# Quadrature
DEFAULT_TOL = 1e-8
PANELS_PER_CYCLE = 8
MAX_PANELS = 1 << 20
DEFAULT_B = 16.0
DEFAULT_EPS = 0.05
ARC_SLACK = 1e-12

# Probes
DEFAULT_SEED = 20240601
DEFAULT_SAMPLES = 200
DEFAULT_QMAX = 32
DEFAULT_LEVEL = 2
MONTE_CARLO_BLOCK = 1 << 18

# Threads used by table construction (the CLI --threads flag overrides this)
THREADS = int(os.environ.get("VINOGRADOV_THREADS", os.cpu_count() or 1))

# Cache location for representation tables
CACHE_DIR = os.environ.get(
    "VINOGRADOV_CACHE_DIR",
    os.path.join(os.path.expanduser("~"), ".cache", "vinogradov-toolkit"),
)

TOOLKIT_VERSION = "0.4.0"
