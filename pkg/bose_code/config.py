import os
from pathlib import Path

SOURCE_DIR = Path(__file__).parent
PROJECT_DIR = SOURCE_DIR.parent
DATA_DIR = SOURCE_DIR.joinpath("data_files")
PROFILING_DIR = PROJECT_DIR.joinpath("profiling_results")

REFERENCE_PAIR_PATH = DATA_DIR.joinpath("reference_pair.json")
SQUARE_BARRIER_PAIR_PATH = DATA_DIR.joinpath("square_barrier_pair.json")
UNSTABLE_PAIR_PATH = DATA_DIR.joinpath("unstable_pair.json")

# numerical defaults
ODE_STEPS_PER_RANGE = 10 ** 5
EIGEN_TOL = 1e-8
MAX_BOX_6D_POINTS = 12
U_QUADRATURE_POINTS = 64
ANNEALING_RESTARTS = 50
ANNEALING_BUDGET = 2000
CONTINUITY_TOL = 1e-12
SAMPLING_DIVISOR = 10 ** 4
TILDE_ELL_RTOL = 1e-10
EPSILON_MAX = 1 / 31

THREADS = int(os.environ.get("BOSE_BOUNDS_THREADS", "1"))
MEMORY_BUDGET_MB = float(os.environ.get("BOSE_BOUNDS_MEMORY_MB", "4096"))
