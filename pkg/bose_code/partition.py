"""partition.py

    Sliding-grid localisation: cells of side l shifted by l u, u in [0, 1]^3.
    Averaged over u, the indicator that two points share a cell is the
    convolution weight h_l(z) = g(z1 / l) g(z2 / l) g(z3 / l), g(t) = max(0, 1 - |t|).
    This module evaluates the weight, checks the averaging identities on
    random pairs and on grid wavefunctions, and checks the pointwise
    comparisons that make the localised potential bounded below.

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

import itertools
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import List, Tuple

import numpy as np

from .common_utils import (
    SQRT3,
    NormalizationError,
    PointwiseViolation,
    parallel_map,
    task_rng,
)
from .config import SAMPLING_DIVISOR, U_QUADRATURE_POINTS
from .potential import evaluate

logger = logging.getLogger(__name__)


########################################################################
#                                                                      #
#                          CONVOLUTION WEIGHT                          #
#                                                                      #
########################################################################


def hat(t):
    return np.maximum(0.0, 1.0 - np.abs(t))


def weight(z, cell):
    """h_l(z) for displacements z of shape (..., 3)."""
    if cell <= 0:
        raise ValueError(f"cell must be positive, got {cell}")
    value = np.prod(hat(np.asarray(z, dtype=float) / cell), axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def min_weight_at_radius(r, cell):
    """
    Minimum of h_l over |z| = r. At a minimiser every coordinate strictly inside
    (0, l) solves t (1 - t / l) = c for one c, so it takes one of two values s
    and l - s. Enumerating j coordinates at s and m at l - s covers all of them;
    for r <= l / 2 the body diagonal wins, giving (1 - r / (sqrt(3) l))^3.
    """
    rho = np.asarray(r, dtype=float) / cell
    best = np.where(rho >= 1, 0.0, np.inf)
    for j in range(4):
        for m in range(4 - j):
            if j + m == 0:
                continue
            # j s^2 + m (1 - s)^2 = rho^2
            discriminant = m * m - (j + m) * (m - rho * rho)
            root = np.sqrt(np.maximum(discriminant, 0.0))
            for s in ((m - root) / (j + m), (m + root) / (j + m)):
                valid = (discriminant >= 0) & (s >= 0) & (s <= 1)
                value = (1 - s) ** j * s ** m
                best = np.where(valid, np.minimum(best, value), best)
    return best


def max_weight_at_radius(r, cell):
    """Maximum of h_l over |z| = r, attained along an axis."""
    return np.maximum(0.0, 1 - np.asarray(r, dtype=float) / cell)


def weight_floor(r, cell):
    """1 - sqrt(3) r / l, a lower bound of h_l on |z| <= l."""
    return 1 - SQRT3 * np.asarray(r, dtype=float) / cell


def same_cell_fraction(x, y, cell, points=U_QUADRATURE_POINTS, periods=None):
    """
    Midpoint-rule average over u of the indicator that x and y lie in the same
    shifted cell; x, y of shape (..., 3). The u-average factorises over axes.
    With periods = extent / cell the cells wrap around a torus.
    """
    u = (np.arange(points) + 0.5) / points
    a = np.asarray(x, dtype=float)[..., None] / cell + u
    b = np.asarray(y, dtype=float)[..., None] / cell + u
    ia, ib = np.floor(a), np.floor(b)
    if periods is not None:
        ia, ib = np.mod(ia, periods), np.mod(ib, periods)
    return np.prod(np.mean(ia == ib, axis=-1), axis=-1)


def _min_image(z, extent):
    return z - extent * np.round(z / extent)


@dataclass(frozen=True)
class ConvolutionReport:
    cell: float
    extent: float
    samples: int
    points: int
    max_deviation: float
    deviation_bound: float
    refinement: Tuple[Tuple[int, float], ...]
    observed_order: float
    monte_carlo_deviation: float
    monte_carlo_sigma: float

    @property
    def passed(self):
        return self.max_deviation <= self.deviation_bound

    def to_dict(self):
        return {
            "cell": self.cell,
            "extent": self.extent,
            "samples": self.samples,
            "points": self.points,
            "max_deviation": self.max_deviation,
            "deviation_bound": self.deviation_bound,
            "refinement": [list(row) for row in self.refinement],
            "observed_order": self.observed_order,
            "monte_carlo_deviation": self.monte_carlo_deviation,
            "monte_carlo_sigma": self.monte_carlo_sigma,
            "passed": self.passed,
        }


def verify_convolution_identity(
    cell, samples, seed, points=256, extent=None, monte_carlo_shifts=256
):
    """
    Compares h_l(x - y) with the u-averaged same-cell indicator at random pairs
    on the torus of side extent (a multiple of cell, default 4 cell), using the
    midpoint rule at points/4, points/2 and points per axis and a Monte Carlo
    average over random shifts. The midpoint rule on an indicator is first
    order in the worst case; its deviation is checked against 3 / points.
    """
    extent = 4 * cell if extent is None else extent
    periods = round(extent / cell)
    if abs(periods * cell - extent) > 1e-9 * extent:
        raise ValueError(f"torus side {extent} is not a multiple of the cell {cell}")
    rng = task_rng(seed, 0)
    x = rng.uniform(0, extent, (samples, 3))
    y = np.mod(x + rng.uniform(-1.5 * cell, 1.5 * cell, (samples, 3)), extent)
    exact = weight(_min_image(x - y, extent), cell)

    refinement = []
    for m in (points // 4, points // 2, points):
        deviation = np.max(np.abs(same_cell_fraction(x, y, cell, m, periods) - exact))
        refinement.append((m, float(deviation)))
    d1, d2, d3 = (row[1] for row in refinement)
    orders = [np.log2(p / q) for p, q in ((d1, d2), (d2, d3)) if p > 0 and q > 0]
    observed = float(np.mean(orders)) if orders else float("inf")

    shifts = rng.uniform(0, 1, (monte_carlo_shifts, 3))
    hits = np.ones((samples, monte_carlo_shifts), dtype=bool)
    for axis in range(3):
        ia = np.mod(np.floor(x[:, axis, None] / cell + shifts[None, :, axis]), periods)
        ib = np.mod(np.floor(y[:, axis, None] / cell + shifts[None, :, axis]), periods)
        hits &= ia == ib
    estimate = hits.mean(axis=1)
    sigma = np.sqrt(np.maximum(estimate * (1 - estimate), 1e-300) / monte_carlo_shifts)

    report = ConvolutionReport(
        cell=float(cell),
        extent=float(extent),
        samples=int(samples),
        points=int(points),
        max_deviation=d3,
        deviation_bound=3.0 / points,
        refinement=tuple(refinement),
        observed_order=observed,
        monte_carlo_deviation=float(np.max(np.abs(estimate - exact))),
        monte_carlo_sigma=float(np.max(sigma)),
    )
    logger.info(
        f"convolution identity: max deviation {d3:.2e} at {points} points per axis, "
        f"observed order {observed:.2f}"
    )
    return report


########################################################################
#                                                                      #
#                        LOCALISED ENERGY SPLIT                        #
#                                                                      #
########################################################################


@dataclass(frozen=True)
class TwoParticleState:
    """psi(x1, x2) sampled at the points i * extent / n of the torus, shape (n,) * 6."""

    values: np.ndarray
    extent: float

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def step(self):
        return self.extent / self.n

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.step ** 6))


def constant_wavefunction(n, extent):
    return TwoParticleState(np.full((n,) * 6, extent ** -3.0), float(extent))


def smooth_random_wavefunction(n, extent, seed, modes=4):
    """A positive background plus a few random low Fourier modes, normalised."""
    rng = task_rng(seed, n)
    coords = np.meshgrid(*[np.arange(n) * (2 * np.pi / n)] * 6, indexing="ij", sparse=True)
    values = np.ones((n,) * 6)
    for _ in range(modes):
        wavevector = rng.integers(-2, 3, 6)
        phase = rng.uniform(0, 2 * np.pi)
        values = values + 0.3 * rng.standard_normal() * np.cos(
            sum(k * c for k, c in zip(wavevector, coords)) + phase
        )
    state = TwoParticleState(values, float(extent))
    return TwoParticleState(values / state.norm(), float(extent))


def _pair_distances(n, step, extent):
    axis = np.arange(n) * step
    gaps = _min_image(axis[:, None] - axis[None, :], extent)
    # axis pairs (0, 3), (1, 4), (2, 5) hold the same coordinate of both particles
    shaped = [gaps.reshape([n if d in (k, k + 3) else 1 for d in range(6)]) for k in range(3)]
    return shaped, np.sqrt(sum(g ** 2 for g in shaped))


def localized_energy_split(psi, cell, v, threads=None):
    """
    (left, right) with left the u-average of the same-cell restricted potential
    energy and right the h_l weighted potential energy. The cell must be a
    multiple c of the grid step; the u-grid is then {0, 1/c, ..., (c-1)/c}^3,
    on which the average is exact, so left == right up to rounding.
    """
    n, step, extent = psi.n, psi.step, psi.extent
    per_cell = round(cell / step)
    periods = round(extent / cell)
    if abs(per_cell * step - cell) > 1e-9 * cell or abs(periods * cell - extent) > 1e-9 * extent:
        raise ValueError(
            f"cell {cell} must be a multiple of the grid step {step} and divide the torus {extent}"
        )
    if periods < 2:
        raise ValueError("the torus must hold at least two cells per axis")
    norm = psi.norm()
    if abs(norm - 1) > 1e-8:
        raise NormalizationError(f"|psi| = {norm} deviates from 1 by more than 1e-8")

    gaps, distance = _pair_distances(n, step, extent)
    density = np.abs(psi.values) ** 2 * evaluate(v, distance) * step ** 6
    if not np.any(density):
        return 0.0, 0.0
    right = float(np.sum(density * reduce(np.multiply, (hat(g / cell) for g in gaps))))

    index = np.arange(n)

    def axis_mask(shift):
        cells = np.mod((index + shift) // per_cell, periods)
        return cells[:, None] == cells[None, :]

    def contribution(shift):
        mask = np.ones((1,) * 6, dtype=bool)
        for k, s in enumerate(shift):
            mask = mask & axis_mask(s).reshape([n if d in (k, k + 3) else 1 for d in range(6)])
        return float(np.sum(density, where=np.broadcast_to(mask, density.shape)))

    shifts = list(itertools.product(range(per_cell), repeat=3))
    left = math.fsum(parallel_map(contribution, shifts, threads)) / len(shifts)
    logger.debug(f"localised energy split: left = {left}, right = {right}")
    return left, right


def barrier_weighted_integral(height, radius, cell):
    """
    Closed form of the integral of height * 1(|z| < radius) * h_l(z) over R^3,
    valid for radius <= cell.
    """
    if radius > cell:
        raise ValueError("closed form needs radius <= cell")
    r, l = radius, cell
    return height * (
        4 * np.pi * r ** 3 / 3
        - 3 * np.pi * r ** 4 / (2 * l)
        + 8 * r ** 5 / (5 * l ** 2)
        - r ** 6 / (6 * l ** 3)
    )


def constant_state_interaction(v, extent, cell, n):
    """h_l weighted potential energy of the constant state on an n^3 relative grid."""
    step = extent / n
    axis = _min_image(np.arange(n) * step, extent)
    x, y, z = np.meshgrid(axis, axis, axis, indexing="ij")
    radii = np.sqrt(x ** 2 + y ** 2 + z ** 2)
    values = evaluate(v, radii) * hat(x / cell) * hat(y / cell) * hat(z / cell)
    return float(np.sum(values) * step ** 3 / extent ** 3)


########################################################################
#                                                                      #
#                         POINTWISE COMPARISONS                        #
#                                                                      #
########################################################################


@dataclass(frozen=True)
class ChainReport:
    cell: float
    delta: float
    c1: float
    admissible: bool
    degenerate: bool
    v1_margin: float
    v2_margin: float
    min_weight_in_range: float
    weight_floor: float
    chain: Tuple[str, ...]

    def to_dict(self):
        return {
            "cell": self.cell,
            "delta": self.delta,
            "c1": self.c1,
            "admissible": self.admissible,
            "degenerate": self.degenerate,
            "v1_margin": self.v1_margin,
            "v2_margin": self.v2_margin,
            "min_weight_in_range": self.min_weight_in_range,
            "weight_floor": self.weight_floor,
            "chain": list(self.chain),
        }


def theorem2_bound_chain(pair, delta, cell):
    """
    Checks V1 >= h_l V1 and c1 V2 <= delta V2 h_l on a dense radial grid,
    with c1 = (1 - sqrt(3) r1 / l) delta and h_l taken in its worst direction.
    """
    r1 = pair.r1
    c1 = (1 - SQRT3 * r1 / cell) * delta
    step = r1 / SAMPLING_DIVISOR
    radii = np.union1d(
        np.arange(0.0, r1 + step, step),
        np.concatenate([pair.v1.breakpoints, pair.v2.breakpoints]),
    )
    v1 = evaluate(pair.v1, radii)
    v2 = evaluate(pair.v2, radii)
    scale = max(np.max(np.abs(v1)), np.max(np.abs(v2)), 1.0)

    v1_gap = v1 - max_weight_at_radius(radii, cell) * v1
    v2_gap = delta * v2 * min_weight_at_radius(radii, cell) - c1 * v2
    for name, gap in (("V1 >= h_l V1", v1_gap), ("c1 V2 <= delta V2 h_l", v2_gap)):
        worst = int(np.argmin(gap))
        if gap[worst] < -1e-12 * scale:
            raise PointwiseViolation(
                f"{name} fails at r = {radii[worst]} by {-gap[worst]}", float(radii[worst])
            )

    admissible = cell >= 2 * r1
    degenerate = c1 <= 0
    if not admissible:
        logger.warning(f"cell {cell} is below 2 r1 = {2 * r1}")
    if degenerate:
        logger.warning(f"c1 = {c1} <= 0: cell {cell} is at most sqrt(3) r1")
    chain = (
        "V1 >= h_l V1",
        "c1 V2 <= delta V2 h_l",
        "V1 - c1 V2 >= h_l (V1 - delta V2)",
    )
    return ChainReport(
        cell=float(cell),
        delta=float(delta),
        c1=float(c1),
        admissible=admissible,
        degenerate=degenerate,
        v1_margin=float(np.min(v1_gap)),
        v2_margin=float(np.min(v2_gap)),
        min_weight_in_range=float(min_weight_at_radius(r1, cell)),
        weight_floor=float(weight_floor(r1, cell)),
        chain=chain,
    )


########################################################################
#                                                                      #
#                           CELL BOOKKEEPING                           #
#                                                                      #
########################################################################


@dataclass(frozen=True)
class CellLayout:
    extent: float
    cell: float
    shift: Tuple[float, float, float]
    segments: Tuple[List[Tuple[float, float, bool]], ...]

    @property
    def full_per_axis(self):
        return tuple(sum(full for _, _, full in axis) for axis in self.segments)

    @property
    def full_cells(self):
        return int(np.prod(self.full_per_axis))

    @property
    def total_cells(self):
        return int(np.prod([len(axis) for axis in self.segments]))

    @property
    def cut_cells(self):
        return self.total_cells - self.full_cells

    def to_dict(self):
        return {
            "extent": self.extent,
            "cell": self.cell,
            "shift": list(self.shift),
            "segments": [[list(seg) for seg in axis] for axis in self.segments],
            "full_cells": self.full_cells,
            "cut_cells": self.cut_cells,
        }


def _axis_segments(extent, cell, u):
    """Pieces of [0, extent] cut by the walls l (k - u), k an integer."""
    walls = cell * (np.arange(np.floor(u), np.ceil(extent / cell + u) + 1) - u)
    inner = walls[(walls > 0) & (walls < extent)]
    edges = np.concatenate([[0.0], inner, [extent]])
    return [
        (float(lo), float(hi), bool(np.isclose(hi - lo, cell, rtol=1e-12, atol=0)))
        for lo, hi in zip(edges[:-1], edges[1:])
    ]


def cell_bookkeeping(extent, cell, u):
    """Sub-boxes a shift u produces inside the walled box [0, extent]^3."""
    shift = tuple(float(s) for s in np.broadcast_to(np.asarray(u, dtype=float), (3,)))
    segments = tuple(_axis_segments(extent, cell, s) for s in shift)
    return CellLayout(float(extent), float(cell), shift, segments)
