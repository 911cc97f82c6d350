"""spectral.py

    Discretised Neumann and periodic eigenproblems: the radial Neumann ball,
    the two-body torus in the relative coordinate, the 3-D box and the full
    6-D two-body Neumann box, together with the transcendental wavenumber of
    the ball problem and Richardson extrapolation over grids.

    All kinetic parts are mimetic (cell-centred, ghost-point Neumann or
    periodic), so the constant vector is an exact kernel vector.

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
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, eigsh

from .common_utils import (
    EIGHT_PI,
    DomainTooSmall,
    GridTooCoarse,
    NoRoot,
    ResourceLimit,
    Unsupported,
    fit_power_law,
    parallel_map,
    task_rng,
)
from .config import EIGEN_TOL, MAX_BOX_6D_POINTS, MEMORY_BUDGET_MB
from .potential import CompositePotential, as_radial, cell_averages, evaluate
from .scattering import integration_grid, scattering_length

logger = logging.getLogger(__name__)

RADIAL_MIN_POINTS = 1000


@dataclass(frozen=True)
class GridOperator:
    domain_kind: str
    extent: float
    points_per_dim: int
    matrix: object
    potential_ref: str


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: Tuple[float, ...]
    residuals: Tuple[float, ...]
    domain_kind: str
    extent: float
    points_per_dim: int
    extrapolated: Optional[float] = None
    order: Optional[float] = None
    samples: Optional[np.ndarray] = None

    @property
    def ground(self):
        return self.eigenvalues[0]

    @property
    def best_estimate(self):
        return self.ground if self.extrapolated is None else self.extrapolated

    def to_dict(self):
        return {
            "eigenvalues": list(self.eigenvalues),
            "residuals": list(self.residuals),
            "domain_kind": self.domain_kind,
            "extent": self.extent,
            "points_per_dim": self.points_per_dim,
            "extrapolated": self.extrapolated,
            "order": self.order,
        }


def _describe(v):
    if v is None:
        return "free"
    if isinstance(v, CompositePotential):
        return f"V1 - {v.coefficient} V2"
    return f"radial potential supported on [0, {v.support_radius}]"


def resolution_radius(v):
    """Smallest length the grid has to resolve: r0 of a pair, else the support."""
    if isinstance(v, CompositePotential):
        return v.pair.r0
    return v.support_radius


########################################################################
#                                                                      #
#                         1-D BUILDING BLOCKS                          #
#                                                                      #
########################################################################


def neumann_laplacian_1d(n, step):
    """-d^2/dx^2 on n cells with ghost-point Neumann ends; rows sum to zero."""
    main = np.full(n, 2.0)
    main[0] = main[-1] = 1.0
    off = -np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / step ** 2


def periodic_laplacian_1d(n, step):
    """-d^2/dx^2 on n periodic points."""
    lap = sp.diags(
        [-np.ones(n - 1), np.full(n, 2.0), -np.ones(n - 1)], [-1, 0, 1], format="lil"
    )
    lap[0, n - 1] -= 1.0
    lap[n - 1, 0] -= 1.0
    return lap.tocsr() / step ** 2


def kron_sum(ops):
    """A x I x I + I x B x I + ... for square sparse factors."""
    sizes = [op.shape[0] for op in ops]
    total = None
    for i, op in enumerate(ops):
        term = sp.identity(1, format="csr")
        for j, size in enumerate(sizes):
            term = sp.kron(term, op if i == j else sp.identity(size), format="csr")
        total = term if total is None else total + term
    return total


def _lowest(operator, k, seed=0):
    """Lowest k eigenpairs of a symmetric sparse operator by restarted Lanczos."""
    size = operator.matrix.shape[0]
    # constant vector plus noise, so the solver never starts orthogonal to the ground state
    v0 = np.ones(size) + 1e-3 * task_rng(seed, size).standard_normal(size)
    values, vectors = eigsh(operator.matrix, k=k, which="SA", tol=EIGEN_TOL, v0=v0)
    order = np.argsort(values)
    values, vectors = values[order], vectors[:, order]
    residuals = [
        float(np.linalg.norm(operator.matrix @ vec - val * vec) / np.linalg.norm(vec))
        for val, vec in zip(values, vectors.T)
    ]
    logger.debug(
        f"{operator.domain_kind}: n = {operator.points_per_dim}, "
        f"E = {values}, residuals = {residuals}"
    )
    return tuple(float(x) for x in values), tuple(residuals), vectors


########################################################################
#                                                                      #
#                            EXTRAPOLATION                             #
#                                                                      #
########################################################################


def richardson(values, steps, order=2):
    """
    Neville table for an error expansion in powers of h^order over grids with
    steps h_0 > h_1 > ...; returns the most extrapolated entry.
    """
    scaled = np.asarray(steps, dtype=float) ** order
    table = [float(x) for x in values]
    for j in range(1, len(values)):
        # table[i] combines the grids i .. i + j - 1 at this point
        table = [
            table[i] + (table[i] - table[i - 1]) / (scaled[i - 1] / scaled[i + j - 1] - 1)
            for i in range(1, len(table))
        ]
    return table[-1]


def observed_order(values, steps):
    """Convergence order from three grids with (roughly) constant refinement ratio."""
    e1, e2, e3 = values
    ratio = steps[0] / steps[1]
    return float(np.log(abs(e1 - e2) / abs(e2 - e3)) / np.log(ratio))


########################################################################
#                                                                      #
#                           RADIAL NEUMANN BALL                        #
#                                                                      #
########################################################################


def _graded_widths(first, total, count):
    """count cell widths growing geometrically from first and summing to total."""
    if count == 1 or abs(first * count - total) <= 1e-12 * total:
        return np.full(count, total / count)

    def excess(q):
        # geometric sum in log form, q ** count overflows for thousands of cells
        return first * np.expm1(count * np.log(q)) / np.expm1(np.log(q)) - total

    if first * count < total:
        # the last width alone reaches total at this ratio, so the sum exceeds it
        upper = (total / first) ** (1 / (count - 1))
        ratio = brentq(excess, 1 + 1e-12, upper)
    else:
        ratio = brentq(excess, 1e-3, 1 - 1e-12)
    return first * ratio ** np.arange(count)


def ball_edges(radial, l0, n):
    """
    Cell edges on [0, l0]: half of the cells resolve the support uniformly with
    every breakpoint an edge, the rest grow geometrically out to l0.
    """
    support = radial.support_radius
    if support == 0:
        return np.linspace(0.0, l0, n + 1)
    inner = integration_grid(radial.breakpoints, support, support / (n // 2))
    outer_count = n + 1 - inner.size
    widths = _graded_widths(inner[-1] - inner[-2], l0 - support, outer_count)
    edges = np.concatenate([inner, support + np.cumsum(widths)])
    edges[-1] = l0
    return edges


def radial_ball_operator(v, l0, n, half=True):
    """
    Finite volume form of (-Delta + c V) on radial functions in the ball of
    radius l0: face areas r^2, cell volumes r^3/3, r^2-weighted cell averages
    of V. The returned matrix is the symmetrised tridiagonal W^-1/2 (K + VW) W^-1/2
    as (diagonal, off-diagonal), plus what is needed to evaluate Rayleigh quotients.
    """
    radial = as_radial(v)
    edges = ball_edges(radial, l0, n)
    centres = 0.5 * (edges[:-1] + edges[1:])
    volumes = (edges[1:] ** 3 - edges[:-1] ** 3) / 3
    coupling = edges[1:-1] ** 2 / np.diff(centres)
    scale = 0.5 if half else 1.0
    if radial.support_radius > 0:
        potential = scale * cell_averages(radial, edges, weight_power=2)
    else:
        potential = np.zeros(edges.size - 1)

    stiffness = np.zeros_like(volumes)
    stiffness[:-1] += coupling
    stiffness[1:] += coupling
    diagonal = stiffness / volumes + potential
    off_diagonal = -coupling / np.sqrt(volumes[:-1] * volumes[1:])
    matrix = (diagonal, off_diagonal, volumes, coupling, potential, centres)
    return GridOperator("radial_ball", float(l0), int(edges.size - 1), matrix, _describe(v))


def _flux_rayleigh(phi, volumes, coupling, potential):
    """Rayleigh quotient in difference form; keeps relative accuracy for tiny E."""
    kinetic = np.sum(coupling * np.diff(phi) ** 2)
    return (kinetic + np.sum(potential * volumes * phi ** 2)) / np.sum(volumes * phi ** 2)


def neumann_ball_ground(v, l0, n=4000, k=1, half=True):
    """
    Lowest k radial eigenvalues of -Delta + V/2 in the ball of radius l0 with
    d phi / dr (l0) = 0, equivalently -u'' + V u / 2 = E u for u = r phi with
    u(0) = 0 and u'(l0) = u(l0) / l0.
    """
    if l0 <= v.support_radius:
        raise DomainTooSmall(
            f"ball radius {l0} must exceed the support radius {v.support_radius}"
        )
    if n < RADIAL_MIN_POINTS:
        raise ValueError(f"need at least {RADIAL_MIN_POINTS} radial cells, got {n}")
    operator = radial_ball_operator(v, l0, n, half)
    diagonal, off_diagonal, volumes, coupling, potential, centres = operator.matrix
    values, vectors = eigh_tridiagonal(
        diagonal, off_diagonal, select="i", select_range=(0, k - 1)
    )
    refined, residuals = [], []
    for val, vec in zip(values, vectors.T):
        applied = diagonal * vec
        applied[:-1] += off_diagonal * vec[1:]
        applied[1:] += off_diagonal * vec[:-1]
        residuals.append(float(np.linalg.norm(applied - val * vec)))
        refined.append(float(_flux_rayleigh(vec / np.sqrt(volumes), volumes, coupling, potential)))

    phi = vectors[:, 0] / np.sqrt(volumes)
    phi = phi / np.sign(phi[-1]) if phi[-1] != 0 else phi
    logger.debug(f"radial ball l0 = {l0}: E = {refined}")
    return SpectralResult(
        tuple(sorted(refined)),
        tuple(residuals),
        "radial_ball",
        float(l0),
        operator.points_per_dim,
        samples=np.column_stack([centres, phi]),
    )


@dataclass(frozen=True)
class Wavenumber:
    h: float
    a: float
    l0: float
    degenerate: bool

    @property
    def expansion_deviation(self):
        """h^2 - 3a/l0^3, of order 1/l0^4."""
        return self.h ** 2 - 3 * self.a / self.l0 ** 3

    def to_dict(self):
        return {
            "h": self.h,
            "h_squared": self.h ** 2,
            "expansion_deviation": self.expansion_deviation,
            "a": self.a,
            "l0": self.l0,
            "degenerate": self.degenerate,
        }


def wavenumber_from_length(a, l0):
    """
    Smallest positive h with h l0 = tan(h (l0 - a)), on the branch below
    pi / (2 (l0 - a)). For a <= 0 that branch has no positive root; the answer
    h = 0 is then reported as degenerate.
    """
    if a >= l0:
        raise NoRoot(f"scattering length {a} is not below the ball radius {l0}")
    if a <= 0:
        logger.info(f"a = {a} <= 0: the first branch has no positive root, reporting h = 0")
        return Wavenumber(0.0, float(a), float(l0), True)
    reach = l0 - a

    # sin(h f) - h l0 cos(h f) has the same roots as tan(h f) - h l0 but no poles
    def residual(h):
        return np.sin(h * reach) - h * l0 * np.cos(h * reach)

    upper = 0.5 * np.pi / reach
    lower = 1e-3 * np.sqrt(3 * a / reach ** 3)
    try:
        h = brentq(residual, lower, upper, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    except ValueError as err:
        raise NoRoot(f"no sign change of the wavenumber equation on ({lower}, {upper})") from err
    return Wavenumber(float(h), float(a), float(l0), False)


def wavenumber_h(v, l0):
    return wavenumber_from_length(scattering_length(v, half=True), l0)


def lemma4_consistency(v, a=None, extents_over_r1=(25, 50, 100), n=4000, threads=None):
    """
    E l0^3 / (3a) for the radial Neumann ball at several radii, the fitted
    exponent of its 1/l0 correction, and h^2 against 3a/l0^3 at the largest radius.
    """
    a = scattering_length(v, half=True) if a is None else a
    r1 = v.support_radius
    radii = [m * r1 for m in extents_over_r1]

    def one(l0):
        energy = neumann_ball_ground(v, l0, n).ground
        return {"l0": l0, "energy": energy, "ratio": energy * l0 ** 3 / (3 * a)}

    rows = parallel_map(one, radii, threads)
    corrections = [row["ratio"] - 1 for row in rows]
    exponent = -fit_power_law(radii, corrections) if all(corrections) else float("nan")
    wave = wavenumber_from_length(a, radii[-1])
    return {
        "a": a,
        "rows": rows,
        "correction_exponent": exponent,
        "h_squared_relative_deviation": wave.expansion_deviation / (3 * a / radii[-1] ** 3),
        "within_tolerance": all(
            abs(row["ratio"] - 1) <= 10 * r1 / row["l0"] for row in rows
        ),
    }


########################################################################
#                                                                      #
#                      CELL AVERAGED POTENTIALS                        #
#                                                                      #
########################################################################

QUADRATURE_POINTS = 3
CUT_CELL_PIECES = 3


def offset_rule(step, points=QUADRATURE_POINTS, pieces=1, tent=False):
    """
    Offsets and weights of a composite Gauss rule averaging over one cell of
    width step or, with tent, over the difference of two such cells (the
    triangle weight on [-step, step]). The weights sum to one.
    """
    nodes, gauss = np.polynomial.legendre.leggauss(points)
    reach = step if tent else step / 2
    edges = np.linspace(-reach, reach, (2 if tent else 1) * pieces + 1)
    half = 0.5 * np.diff(edges)
    offsets = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * nodes[None, :]
    weights = half[:, None] * gauss[None, :]
    if tent:
        weights = weights * (1 - np.abs(offsets) / step) / step
    else:
        weights = weights / step
    return offsets.ravel(), weights.ravel()


def _accumulate(radial, coords, rule):
    offsets, weights = rule
    x, y, z = coords
    total = np.zeros(np.broadcast(x, y, z).shape)
    for (ox, wx), (oy, wy), (oz, wz) in itertools.product(zip(offsets, weights), repeat=3):
        radii = np.sqrt((x + ox) ** 2 + (y + oy) ** 2 + (z + oz) ** 2)
        total += wx * wy * wz * evaluate(radial, radii)
    return total


def averaged_potential(v, axis, step, tent=False):
    """
    V(|x|) averaged over the cell around every node of the lattice axis^3.
    Cells crossed by a breakpoint sphere get a finer composite rule, so a
    discontinuity does not jump from node to node as the grid changes.
    """
    radial = as_radial(v)
    axis = np.asarray(axis, dtype=float)
    coords = (axis[:, None, None], axis[None, :, None], axis[None, None, :])
    values = _accumulate(radial, coords, offset_rule(step, tent=tent))

    reach = step if tent else step / 2
    near = np.sqrt(sum(np.maximum(np.abs(c) - reach, 0.0) ** 2 for c in coords))
    far = np.sqrt(sum((np.abs(c) + reach) ** 2 for c in coords))
    inner = radial.breakpoints[radial.breakpoints > 0]
    cut = np.zeros(values.shape, dtype=bool)
    for b in inner:
        cut |= (near < b) & (b < far)
    if np.any(cut):
        index = np.nonzero(cut)
        fine = offset_rule(step, pieces=CUT_CELL_PIECES, tent=tent)
        values[index] = _accumulate(radial, tuple(axis[i] for i in index), fine)
        logger.debug(f"{index[0].size} cut cells refined with {CUT_CELL_PIECES} pieces per axis")
    return values


########################################################################
#                                                                      #
#                          TWO-BODY TORUS                              #
#                                                                      #
########################################################################


def torus_operator(v, L, n):
    """-2 Delta_per + cell averages of V(min-image |x|) on the n^3 grid of [0, L)^3."""
    step = L / n
    axis = np.arange(n) * step
    axis = axis - L * np.round(axis / L)
    potential = averaged_potential(v, axis, step).ravel()
    lap = periodic_laplacian_1d(n, step)
    matrix = 2 * kron_sum([lap, lap, lap]) + sp.diags(potential)
    return GridOperator("torus_3d", float(L), int(n), matrix.tocsr(), _describe(v))


def _check_torus(v, L, n):
    if L <= 2 * v.support_radius:
        raise DomainTooSmall(f"torus side {L} must exceed twice the support radius")
    resolution = resolution_radius(v)
    if resolution > 0 and L / n >= resolution / 4:
        raise GridTooCoarse(
            f"grid step {L / n} is not below a quarter of the radius {resolution}"
        )


def two_body_torus_ground(v, L, n, k=1, extrapolate=True):
    """
    Ground energy of the relative Hamiltonian on the torus of side L; with
    extrapolate, a second grid with 3/4 of the points gives a Richardson value.
    """
    _check_torus(v, L, n)
    values, residuals, _ = _lowest(torus_operator(v, L, n), k)
    extrapolated = None
    coarse = int(round(0.75 * n))
    if extrapolate:
        try:
            _check_torus(v, L, coarse)
        except GridTooCoarse:
            logger.warning(f"coarse grid n = {coarse} under-resolves V, no extrapolation")
        else:
            coarse_values, _, _ = _lowest(torus_operator(v, L, coarse), 1)
            extrapolated = richardson([coarse_values[0], values[0]], [L / coarse, L / n])
    return SpectralResult(values, residuals, "torus_3d", float(L), int(n), extrapolated)


def torus_convergence(v, L, grids):
    """Ground energies on three grids, their observed order and extrapolation."""
    energies = [two_body_torus_ground(v, L, n, extrapolate=False).ground for n in grids]
    steps = [L / n for n in grids]
    return {
        "grids": list(grids),
        "energies": energies,
        "observed_order": observed_order(energies, steps),
        "extrapolated": richardson(energies, steps),
    }


def torus_sweep(v, extents, n, a=None, threads=None):
    """Rows (extent, E, E extent^3 / (8 pi a)) with E the extrapolated ground energy."""
    a = scattering_length(v, half=True) if a is None else a

    def one(L):
        energy = two_body_torus_ground(v, L, n).best_estimate
        return (float(L), energy, energy * L ** 3 / (EIGHT_PI * a))

    return parallel_map(one, extents, threads)


########################################################################
#                                                                      #
#                         NEUMANN BOXES                                #
#                                                                      #
########################################################################


def _cell_centres(side, n):
    return (np.arange(n) + 0.5) * side / n


def box_neumann_3d_operator(v, side, n):
    """Neumann Laplacian on the cube of the given side, plus cell averages of V(|x - centre|) if v is given."""
    step = side / n
    lap = neumann_laplacian_1d(n, step)
    matrix = kron_sum([lap, lap, lap])
    if v is not None:
        axis = _cell_centres(side, n) - side / 2
        matrix = matrix + sp.diags(averaged_potential(v, axis, step).ravel())
    return GridOperator("box_neumann_3d", float(side), int(n), matrix.tocsr(), _describe(v))


def box_neumann_3d_ground(v, side, n, k=2):
    values, residuals, _ = _lowest(box_neumann_3d_operator(v, side, n), k)
    return SpectralResult(values, residuals, "box_neumann_3d", float(side), int(n))


def box_6d_memory_mb(n, k=1):
    basis = max(2 * k + 1, 20)
    return n ** 6 * 8 * (basis + 4) / 2 ** 20


def _neumann_apply(u, axis, step):
    flux = np.diff(u, axis=axis)
    pad = [(0, 0)] * u.ndim
    pad[axis] = (1, 1)
    return -np.diff(np.pad(flux, pad), axis=axis) / step ** 2


def box_6d_operator(v, l1, n):
    """
    Matrix-free -Delta_1 - Delta_2 + V(x_1 - x_2) on the product of two Neumann
    cubes of side l1, each with n cell-centred points per axis.
    """
    step = l1 / n
    # V averaged over pairs of cells depends only on the difference of their indices
    differences = np.arange(-(n - 1), n) * step
    by_difference = averaged_potential(v, differences, step, tent=True)
    index = np.arange(n)[:, None] - np.arange(n)[None, :] + n - 1
    # axis pairs (0, 3), (1, 4), (2, 5) hold the same coordinate of both particles
    potential = by_difference[
        tuple(index.reshape([n if d in (axis, axis + 3) else 1 for d in range(6)]) for axis in range(3))
    ]
    shape = (n,) * 6

    def matvec(flat):
        u = np.asarray(flat).reshape(shape)
        out = potential * u
        for axis in range(6):
            out += _neumann_apply(u, axis, step)
        return out.ravel()

    size = n ** 6
    matrix = LinearOperator((size, size), matvec=matvec, dtype=float)
    return GridOperator("box_neumann_6d", float(l1), int(n), matrix, _describe(v))


def two_body_box_ground(v, l1, n, k=1, extrapolate=True):
    """
    Direct 6-D Neumann computation of the two-body ground energy in a cube of
    side l1; deliberately coarse, a cross-check of the torus number. With
    extrapolate and n >= 6 a second grid of n - 2 points gives a Richardson value.
    """
    if l1 <= 2 * v.support_radius:
        raise DomainTooSmall(f"box side {l1} must exceed twice the support radius")
    if n > MAX_BOX_6D_POINTS:
        raise ResourceLimit(f"n = {n} exceeds the 6-D grid cap {MAX_BOX_6D_POINTS}")
    needed = box_6d_memory_mb(n, k)
    if needed > MEMORY_BUDGET_MB:
        raise ResourceLimit(
            f"6-D solve needs about {needed:.0f} MB, budget is {MEMORY_BUDGET_MB:.0f} MB"
        )
    logger.info(f"6-D Neumann box: {n ** 6} unknowns, about {needed:.0f} MB")
    values, residuals, _ = _lowest(box_6d_operator(v, l1, n), k)
    extrapolated = None
    if extrapolate and n - 2 >= 4:
        coarse, _, _ = _lowest(box_6d_operator(v, l1, n - 2), 1)
        extrapolated = richardson([coarse[0], values[0]], [l1 / (n - 2), l1 / n])
    return SpectralResult(values, residuals, "box_neumann_6d", float(l1), int(n), extrapolated)


def neumann_box_k_ground(v, l, k, n):
    """Ground energy of k particles in the Neumann cube; only k = 1, 2 are feasible."""
    if k == 1:
        return SpectralResult((0.0,), (0.0,), "box_neumann_3d", float(l), int(n))
    if k == 2:
        return two_body_box_ground(v, l, n)
    raise Unsupported(f"{k}-particle Neumann eigensolves need a {3 * k}-D grid")
