"""scattering.py

    Zero-energy scattering: the scattering length a of a radial potential,
    computed by integrating -f'' + c V f = 0 from the origin and matching
    to the straight line f = f'(r - a) at the edge of the support.

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

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .common_utils import BoundStateDetected, parallel_map
from .config import ODE_STEPS_PER_RANGE
from .potential import (
    CompositePotential,
    as_radial,
    evaluate,
    require_valid,
    shifted_truncation,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScatteringSolution:
    a: float
    r: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    w_positive: bool
    r_match: float
    grid_step: float
    half: bool

    @property
    def f_samples(self):
        return np.column_stack([self.r, self.f])

    def to_dict(self):
        return {
            "a": self.a,
            "w_positive": self.w_positive,
            "r_match": self.r_match,
            "grid_step": self.grid_step,
            "half": self.half,
        }


########################################################################
#                                                                      #
#                         RUNGE-KUTTA TRANSFER                         #
#                                                                      #
########################################################################


def integration_grid(breakpoints, r_match, step, r_max=None):
    """Grid on [0, r_max] of spacing at most step with every breakpoint a node."""
    nodes = [b for b in np.asarray(breakpoints, dtype=float) if 0 < b < r_match]
    edges = np.unique(np.concatenate([[0.0], nodes, [r_match]]))
    if r_max is not None and r_max > r_match:
        edges = np.append(edges, r_max)
    pieces = [np.array([0.0])]
    for lo, hi in zip(edges[:-1], edges[1:]):
        count = max(1, int(np.ceil((hi - lo) / step - 1e-9)))
        pieces.append(np.linspace(lo, hi, count + 1)[1:])
    return np.concatenate(pieces)


def _stage_values(radial, grid, scale):
    """
    c V at the left, middle and right RK4 stage of every step, each taken from
    the piece that contains the step, so jumps at nodes are never smeared.
    """
    lo, hi = grid[:-1], grid[1:]
    mids = 0.5 * (lo + hi)
    values = np.zeros((3, lo.size))
    for pc in radial.pieces:
        mask = (mids > pc.lo) & (mids < pc.hi)
        if np.any(mask):
            values[0, mask] = pc(lo[mask])
            values[1, mask] = pc(mids[mask])
            values[2, mask] = pc(hi[mask])
    return scale * values


def _transfer_matrices(q, h):
    """RK4 one-step matrices for y' = [[0, 1], [q(r), 0]] y, batched over steps."""
    n = h.size
    eye = np.broadcast_to(np.eye(2), (n, 2, 2))

    def generator(qs):
        out = np.zeros((n, 2, 2))
        out[:, 0, 1] = 1.0
        out[:, 1, 0] = qs
        return out

    a0, am, a1 = generator(q[0]), generator(q[1]), generator(q[2])
    hh = h[:, None, None]
    k1 = a0
    k2 = am @ (eye + 0.5 * hh * k1)
    k3 = am @ (eye + 0.5 * hh * k2)
    k4 = a1 @ (eye + hh * k3)
    return eye + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _propagate(transfer):
    t00, t01 = transfer[:, 0, 0].tolist(), transfer[:, 0, 1].tolist()
    t10, t11 = transfer[:, 1, 0].tolist(), transfer[:, 1, 1].tolist()
    f, g = 0.0, 1.0
    fs, gs = [f], [g]
    for a, b, c, d in zip(t00, t01, t10, t11):
        f, g = a * f + b * g, c * f + d * g
        fs.append(f)
        gs.append(g)
    return np.array(fs), np.array(gs)


########################################################################
#                                                                      #
#                          SCATTERING LENGTHS                          #
#                                                                      #
########################################################################


def solve_zero_energy(v, half=True, step=None, r_max=None, raise_on_bound_state=True):
    """
    Solve -f'' + c V f = 0 with f(0) = 0, f'(0) = 1, c = 1/2 if half else 1,
    up to the support radius and match f = f'(r_match) (r - a).

    A zero of f in (0, r_match], or f'(r_match) <= 0, means w = f / r is not
    positive and raises BoundStateDetected (or, with raise_on_bound_state=False,
    is returned with w_positive=False).
    """
    if isinstance(v, CompositePotential):
        require_valid(v.pair)
    radial = as_radial(v)
    r_match = float(v.support_radius)
    scale = 0.5 if half else 1.0

    if r_match == 0:
        r = np.linspace(0.0, r_max or 1.0, 2)
        return ScatteringSolution(0.0, r, r.copy(), np.ones(2), True, 0.0, 0.0, half)

    step = step or r_match / ODE_STEPS_PER_RANGE
    grid = integration_grid(radial.breakpoints, r_match, step, r_max)
    q = _stage_values(radial, grid, scale)
    f, fprime = _propagate(_transfer_matrices(q, np.diff(grid)))

    i_match = int(np.searchsorted(grid, r_match - 1e-12 * r_match))
    inside = slice(1, i_match + 1)
    sign_changes = np.nonzero(f[inside] <= 0)[0]
    slope = fprime[i_match]
    a = r_match - f[i_match] / slope if slope != 0 else np.inf

    w_positive = sign_changes.size == 0 and slope > 0
    if not w_positive:
        radius = float(grid[1 + sign_changes[0]]) if sign_changes.size else r_match
        message = (
            f"zero-energy solution loses positivity near r = {radius}: "
            "the potential binds a two-body state"
        )
        if raise_on_bound_state:
            raise BoundStateDetected(message, radius)
        logger.warning(message)

    logger.debug(f"a = {a} (half={half}, step={step}, r_match={r_match})")
    return ScatteringSolution(
        float(a), grid, f, fprime, w_positive, r_match, float(step), half
    )


def scattering_length(v, half=True, step=None):
    return solve_zero_energy(v, half=half, step=step).a


def square_barrier_scattering_length(height, radius, half=True):
    """Closed form for a constant height on [0, radius] (a well if height < 0)."""
    kappa_sq = (0.5 if half else 1.0) * height
    if kappa_sq > 0:
        kappa = np.sqrt(kappa_sq)
        return radius - np.tanh(kappa * radius) / kappa
    if kappa_sq < 0:
        k = np.sqrt(-kappa_sq)
        return radius - np.tan(k * radius) / k
    return 0.0


def convergence_order(v, half=True, coarse_step=None):
    """Observed order of the integrator from three successively halved steps."""
    coarse_step = coarse_step or v.support_radius / 50
    a1, a2, a3 = (
        scattering_length(v, half=half, step=coarse_step / 2 ** j) for j in range(3)
    )
    return float(np.log2(abs(a1 - a2) / abs(a2 - a3)))


def scattering_length_sweep(pair, lambdas, half=True, threads=None):
    """Scattering length of V1 - lambda V2 over a grid of couplings."""

    def one(lam):
        sol = solve_zero_energy(
            CompositePotential(pair, lam), half=half, raise_on_bound_state=False
        )
        return (float(lam), sol.a, sol.w_positive)

    return parallel_map(one, lambdas, threads)


########################################################################
#                                                                      #
#                       DYSON CONSTRUCTION INPUTS                      #
#                                                                      #
########################################################################


def half_height_radius(v1, tol=1e-12):
    """R = sup{r : v1(s) > v1(0) / 2 for all s < r}, snapped to breakpoints."""
    half = evaluate(v1, 0.0) / 2
    support = v1.support_radius
    radii = np.linspace(0.0, 1.01 * support, 10 ** 4 + 1)
    below = np.nonzero(evaluate(v1, radii) <= half)[0]
    first = below[0]
    radius = bisect(
        lambda r: float(evaluate(v1, r)) - half, radii[first - 1], radii[first], xtol=tol * support
    )
    nearest = v1.breakpoints[np.argmin(np.abs(v1.breakpoints - radius))]
    if abs(nearest - radius) <= 10 * tol * support:
        radius = float(nearest)
    return float(radius)


def v1_prime(pair):
    """V1'(r) = V1(r) - V1(0)/2 for r < R and 0 otherwise."""
    radius = half_height_radius(pair.v1)
    return shifted_truncation(pair.v1, evaluate(pair.v1, 0.0) / 2, radius)


def scattering_length_v1_prime(pair):
    """a' = scattering length of 2 V1' in the 1/2 normalisation, i.e. half=False on V1'."""
    require_valid(pair)
    potential = v1_prime(pair)
    assert min(evaluate(potential, potential.breakpoints)) >= 0, "V1' must be non-negative"
    return solve_zero_energy(potential, half=False).a
