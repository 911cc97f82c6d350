"""common_utils.py

    Common methods and classes for multiple parts of the routine.

    ====================================================================

    This file is part of Bose Bounds.

    Copyright (C) 2026 The Bose Bounds developers

    Bose Bounds is free software: you can redistribute it and/or
    modify it under the terms of the GNU General Public License as
    published by the Free Software Foundation, either version 3 of the
    License, or any later version.

    This program is distributed in the hope that it will be useful,
    but WITHOUT ANY WARRANTY; without even the implied warranty of
    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
    GNU General Public License for more details.

    You should have received a copy of the GNU General Public License
    along with this program.  If not, see <https://www.gnu.org/licenses/>.

    ====================================================================

"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import THREADS

FOUR_PI = 4 * np.pi
EIGHT_PI = 8 * np.pi
SQRT3 = np.sqrt(3.0)


########################################################################
#                                                                      #
#                             EXCEPTIONS                               #
#                                                                      #
########################################################################


class BoseBoundsError(Exception):
    """Base class of every error raised by the package."""


class ValidationError(BoseBoundsError):
    pass


class BoundStateDetected(BoseBoundsError):
    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class DomainTooSmall(BoseBoundsError):
    pass


class NoRoot(BoseBoundsError):
    pass


class GridTooCoarse(BoseBoundsError):
    pass


class ResourceLimit(BoseBoundsError):
    pass


class Unsupported(BoseBoundsError):
    pass


class HypothesisViolated(BoseBoundsError):
    pass


class NormalizationError(BoseBoundsError):
    pass


class PointwiseViolation(BoseBoundsError):
    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class NoAdmissibleTildeEll(BoseBoundsError):
    pass


class DegenerateGeometry(BoseBoundsError):
    pass


class EpsilonOutOfRange(BoseBoundsError):
    pass


########################################################################
#                                                                      #
#                         SEEDS AND WORKERS                            #
#                                                                      #
########################################################################


def task_rng(seed, *key):
    """Generator for one task; depends only on (seed, key), never on scheduling."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def parallel_map(fn, tasks, threads=None):
    """Map fn over tasks, returning results in task order."""
    tasks = list(tasks)
    threads = THREADS if threads is None else threads
    if threads <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def fit_power_law(xs, ys):
    """Least squares fit of log|y| = p log x + c, returns the exponent p."""
    xs = np.asarray(xs, dtype=float)
    ys = np.abs(np.asarray(ys, dtype=float))
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)
