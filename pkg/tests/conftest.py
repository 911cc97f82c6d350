from pytest import fixture

import logging
import cProfile
import os

from bose_code.config import (
    PROFILING_DIR,
    REFERENCE_PAIR_PATH,
    SQUARE_BARRIER_PAIR_PATH,
    UNSTABLE_PAIR_PATH,
)
from bose_code.potential import Piece, RadialPotential, load_pair

logger = logging.getLogger(__name__)


@fixture(autouse=True)
def profile(request):
    function = request.function
    test_names = [key for key in request.keywords if key.startswith(function.__name__)]
    test_name = test_names[0] if test_names else function.__name__

    if not os.environ.get("PROFILE"):
        yield test_name
        return

    with cProfile.Profile() as pr:
        yield test_name

    test_dir = PROFILING_DIR.joinpath(function.__module__)
    test_dir.mkdir(parents=True, exist_ok=True)
    pr.dump_stats(test_dir.joinpath(f"{test_name}.pstats"))


@fixture
def reference_pair():
    """Barrier 8 on [0, 1] and well 1 on [1, 2]."""
    return load_pair(REFERENCE_PAIR_PATH)


@fixture
def barrier_pair():
    return load_pair(SQUARE_BARRIER_PAIR_PATH)


@fixture
def unstable_pair():
    return load_pair(UNSTABLE_PAIR_PATH)


@fixture
def c5_bump():
    """4 (1 - r^2)^6 on [0, 1], five times continuously differentiable at r = 1."""
    coeffs = (1, 0, -6, 0, 15, 0, -20, 0, 15, 0, -6, 0, 1)
    return RadialPotential((Piece(0.0, 1.0, tuple(4.0 * c for c in coeffs)),))
