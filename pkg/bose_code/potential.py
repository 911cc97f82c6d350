"""potential.py

    Radial potentials: piecewise polynomial V(r), the pair (V1, V2) of a
    repulsive core and an attractive tail, and the composites V1 - lambda V2.

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

import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from .common_utils import ValidationError
from .config import CONTINUITY_TOL, SAMPLING_DIVISOR

logger = logging.getLogger(__name__)

# Gauss-Legendre rule used for cell averages; exact up to degree 2 * 12 - 1
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)


########################################################################
#                                                                      #
#                          RADIAL POTENTIALS                           #
#                                                                      #
########################################################################


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    coeffs: Tuple[float, ...]

    def __call__(self, r):
        return P.polyval(r, self.coeffs)

    @property
    def is_zero(self):
        return all(c == 0 for c in self.coeffs)


@dataclass(frozen=True)
class RadialPotential:
    """
    Piecewise polynomial V(r); coefficients are in ascending powers of r.
    Gaps between the given pieces are filled with zero pieces, so the pieces
    always cover [0, support_radius] without overlap.
    """

    pieces: Tuple[Piece, ...] = ()

    def __post_init__(self):
        ordered = sorted(self.pieces, key=lambda pc: pc.lo)
        filled = []
        cursor = 0.0
        for pc in ordered:
            if pc.lo < 0 or pc.hi <= pc.lo:
                raise ValidationError(f"bad piece interval [{pc.lo}, {pc.hi}]")
            if pc.lo < cursor:
                raise ValidationError(
                    f"pieces overlap on [{pc.lo}, {cursor}]; pieces must not overlap"
                )
            if pc.lo > cursor:
                filled.append(Piece(cursor, pc.lo, (0.0,)))
            filled.append(pc)
            cursor = pc.hi
        # drop trailing zero pieces so the last piece ends at the support radius
        while filled and filled[-1].is_zero:
            filled.pop()
        object.__setattr__(self, "pieces", tuple(filled))

    @property
    def support_radius(self):
        return self.pieces[-1].hi if self.pieces else 0.0

    @property
    def breakpoints(self):
        if not self.pieces:
            return np.array([0.0])
        return np.array([self.pieces[0].lo] + [pc.hi for pc in self.pieces])

    def __call__(self, r):
        return evaluate(self, r)

    @classmethod
    def from_dict(cls, data):
        pieces = [
            Piece(float(pc["lo"]), float(pc["hi"]), tuple(float(c) for c in pc["coeffs"]))
            for pc in data.get("pieces", [])
        ]
        return cls(tuple(pieces))

    def to_dict(self):
        return {
            "pieces": [
                {"lo": pc.lo, "hi": pc.hi, "coeffs": list(pc.coeffs)}
                for pc in self.pieces
                if not pc.is_zero
            ]
        }


def zero_potential():
    return RadialPotential(())


def square_barrier(height, radius, start=0.0):
    """Constant height on [start, radius]; negative height gives a well."""
    return RadialPotential((Piece(float(start), float(radius), (float(height),)),))


def scaled(p, factor):
    return RadialPotential(
        tuple(Piece(pc.lo, pc.hi, tuple(factor * c for c in pc.coeffs)) for pc in p.pieces)
    )


def shifted_truncation(p, shift, radius):
    """V(r) - shift on [0, radius), zero beyond; used for V1' of the Dyson argument."""
    pieces = []
    for pc in p.pieces:
        if pc.lo >= radius:
            break
        coeffs = list(pc.coeffs)
        coeffs[0] -= shift
        pieces.append(Piece(pc.lo, min(pc.hi, radius), tuple(coeffs)))
    return RadialPotential(tuple(pieces))


def combine(p, q, alpha=1.0, beta=1.0):
    """alpha p + beta q as a single RadialPotential with merged breakpoints."""
    edges = np.union1d(p.breakpoints, q.breakpoints)
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        coeffs = P.polyadd(
            alpha * np.asarray(_coeffs_at(p, mid)), beta * np.asarray(_coeffs_at(q, mid))
        )
        pieces.append(Piece(float(lo), float(hi), tuple(float(c) for c in coeffs)))
    return RadialPotential(tuple(pieces))


def _coeffs_at(p, r):
    for pc in p.pieces:
        if pc.lo <= r <= pc.hi:
            return pc.coeffs
    return (0.0,)


def maximum(p):
    """Exact maximum of V over [0, oo), using endpoints and critical points."""
    best = 0.0
    for pc in p.pieces:
        candidates = [pc.lo, pc.hi]
        if len(pc.coeffs) > 2:
            crit = Polynomial(pc.coeffs).deriv().roots()
            crit = crit[np.isreal(crit)].real
            candidates += [c for c in crit if pc.lo <= c <= pc.hi]
        best = max(best, float(np.max(pc(np.array(candidates)))))
    return best


def cell_averages(p, edges, weight_power=0):
    """
    Averages of V over the cells [edges[i], edges[i+1]] with weight r**weight_power.
    Cells are split at the breakpoints of V, so the result is exact for pieces of
    degree below 24 - weight_power.
    """
    edges = np.asarray(edges, dtype=float)
    inner = p.breakpoints[(p.breakpoints > edges[0]) & (p.breakpoints < edges[-1])]
    refined = np.union1d(edges, inner)
    lo, hi = refined[:-1], refined[1:]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo)[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    integrand = evaluate(p, nodes) * nodes ** weight_power
    sub_integrals = (integrand * _GAUSS_WEIGHTS[None, :]).sum(axis=1) * half
    starts = np.searchsorted(refined, edges[:-1])
    numer = np.add.reduceat(sub_integrals, starts)
    k = weight_power + 1
    denom = (edges[1:] ** k - edges[:-1] ** k) / k
    return numer / denom


########################################################################
#                                                                      #
#                           POTENTIAL PAIRS                            #
#                                                                      #
########################################################################


@dataclass(frozen=True)
class PotentialPair:
    v1: RadialPotential
    v2: RadialPotential
    r0: float
    r1: float

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                RadialPotential.from_dict(data["v1"]),
                RadialPotential.from_dict(data.get("v2", {})),
                float(data["r0"]),
                float(data["r1"]),
            )
        except KeyError as err:
            raise ValidationError(f"pair description lacks the key {err}") from err

    def to_dict(self):
        return {
            "v1": self.v1.to_dict(),
            "v2": self.v2.to_dict(),
            "r0": self.r0,
            "r1": self.r1,
        }


@dataclass(frozen=True)
class CompositePotential:
    """V1 - coefficient * V2, supported on [0, r1]."""

    pair: PotentialPair
    coefficient: float = 0.0

    def __post_init__(self):
        if self.coefficient < 0:
            raise ValueError(f"coupling must be non-negative, got {self.coefficient}")

    @cached_property
    def radial(self):
        return combine(self.pair.v1, self.pair.v2, 1.0, -self.coefficient)

    @property
    def support_radius(self):
        return self.pair.r1

    @property
    def breakpoints(self):
        return self.radial.breakpoints

    def __call__(self, r):
        return evaluate(self, r)


def as_radial(p):
    return p.radial if isinstance(p, CompositePotential) else p


def stability_potential(pair):
    """V0 = V1 - V2, the potential whose stability constant B enters the certificate."""
    return CompositePotential(pair, 1.0)


def evaluate(p, r):
    """Value of a radial or composite potential at r >= 0 (scalar or array)."""
    if isinstance(p, CompositePotential):
        return evaluate(p.pair.v1, r) - p.coefficient * evaluate(p.pair.v2, r)
    r_arr = np.asarray(r, dtype=float)
    out = np.zeros_like(r_arr)
    # reversed so that the left piece wins on a shared boundary
    for pc in reversed(p.pieces):
        mask = (r_arr >= pc.lo) & (r_arr <= pc.hi)
        if np.any(mask):
            out = np.where(mask, pc(r_arr), out)
    if np.ndim(r) == 0:
        return float(out)
    return out


########################################################################
#                                                                      #
#                             VALIDATION                               #
#                                                                      #
########################################################################


@dataclass
class ValidationReport:
    failures: List[Tuple[str, float]] = field(default_factory=list)
    warnings: List[Tuple[str, float]] = field(default_factory=list)

    @property
    def valid(self):
        return not self.failures

    def to_dict(self):
        return {
            "valid": self.valid,
            "failures": [{"condition": c, "radius": r} for c, r in self.failures],
            "warnings": [{"condition": c, "radius": r} for c, r in self.warnings],
        }


def discontinuities(p):
    """Piece boundaries where V jumps by more than CONTINUITY_TOL * max|V|."""
    scale = max(maximum(p), maximum(scaled(p, -1.0)), 1.0)
    jumps = []
    for left, right in zip(p.pieces, p.pieces[1:] + (None,)):
        right_value = right(left.hi) if right is not None else 0.0
        if abs(left(left.hi) - right_value) > CONTINUITY_TOL * scale:
            jumps.append(left.hi)
    return jumps


def _first(radii, mask):
    hits = np.nonzero(mask)[0]
    return float(radii[hits[0]]) if hits.size else None


def validate_pair(pair):
    report = ValidationReport()
    if pair.r0 <= 0 or pair.r1 < pair.r0:
        report.failures.append(("need 0 < r0 <= r1", pair.r0))
        return report

    extent = 1.25 * max(pair.r1, pair.v1.support_radius, pair.v2.support_radius)
    step = pair.r1 / SAMPLING_DIVISOR
    radii = np.union1d(
        np.arange(0.0, extent + step, step),
        np.concatenate([pair.v1.breakpoints, pair.v2.breakpoints]),
    )
    v1 = evaluate(pair.v1, radii)
    v2 = evaluate(pair.v2, radii)

    checks = [
        ("v1 must vanish for r > r0", (radii > pair.r0) & (v1 != 0)),
        ("v2 must vanish for r < r0", (radii < pair.r0) & (v2 != 0)),
        ("v2 must vanish for r > r1", (radii > pair.r1) & (v2 != 0)),
        ("v1 must be non-negative", v1 < 0),
        ("v2 must be non-negative", v2 < 0),
    ]
    for condition, mask in checks:
        witness = _first(radii, mask)
        if witness is not None:
            report.failures.append((condition, witness))

    if not evaluate(pair.v1, 0.0) > 0:
        report.failures.append(("V1(0) must be positive", 0.0))

    for name, pot in (("v1", pair.v1), ("v2", pair.v2)):
        for radius in discontinuities(pot):
            report.warnings.append((f"{name} is discontinuous", radius))

    for condition, radius in report.warnings:
        logger.warning(f"{condition} at r = {radius}; accepted as a step potential")
    for condition, radius in report.failures:
        logger.debug(f"pair validation failed: {condition} (witness r = {radius})")
    return report


def require_valid(pair):
    report = validate_pair(pair)
    if not report.valid:
        condition, radius = report.failures[0]
        raise ValidationError(f"invalid potential pair: {condition} (witness r = {radius})")
    return pair


########################################################################
#                                                                      #
#                               FILES                                  #
#                                                                      #
########################################################################


def load_pair(path):
    with open(path, "r") as pair_file:
        return PotentialPair.from_dict(json.load(pair_file))


def dump_pair(pair, path):
    with open(path, "w") as pair_file:
        json.dump(pair.to_dict(), pair_file, indent=2, sort_keys=True)


def pair_content_hash(path):
    with open(path, "rb") as pair_file:
        return hashlib.sha256(pair_file.read()).hexdigest()
