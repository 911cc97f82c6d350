"""certificate.py

    The constants behind the lower bound: the Dyson-type two-body constant
    E'(l), the admissible delta, the cell l, c1 and the certified coupling
    lambda, then the evaluation of the two-body, k-body and N-body bounds
    at a density rho, the inclusion-exclusion occupancy count, and a
    numerical probe of the stability constant B.

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
from dataclasses import asdict, dataclass, field, fields
from math import comb
from typing import Dict, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import pdist

from .common_utils import (
    EIGHT_PI,
    FOUR_PI,
    SQRT3,
    DegenerateGeometry,
    EpsilonOutOfRange,
    NoAdmissibleTildeEll,
    fit_power_law,
    parallel_map,
    task_rng,
)
from .config import (
    ANNEALING_BUDGET,
    ANNEALING_RESTARTS,
    EPSILON_MAX,
    TILDE_ELL_RTOL,
)
from .potential import (
    CompositePotential,
    evaluate,
    maximum,
    require_valid,
    stability_potential,
)
from .scattering import (
    half_height_radius,
    scattering_length,
    scattering_length_v1_prime,
    solve_zero_energy,
)

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 10.0


########################################################################
#                                                                      #
#                        CONSTANTS PIPELINE                            #
#                                                                      #
########################################################################


def tilde_ell(pair, a_prime=None, radius=None):
    """
    Smallest l with 0 < 3 a' / ((2 l)^3 - R^3) < V1(0) / 2, found by bracketed
    root finding on the boundary of the inequality and pushed inside it by a
    relative TILDE_ELL_RTOL.
    """
    v1_at_zero = evaluate(pair.v1, 0.0)
    if not v1_at_zero > 0:
        raise NoAdmissibleTildeEll(f"V1(0) = {v1_at_zero} is not positive")
    a_prime = scattering_length_v1_prime(pair) if a_prime is None else a_prime
    radius = half_height_radius(pair.v1) if radius is None else radius
    if not a_prime > 0:
        raise NoAdmissibleTildeEll(f"a' = {a_prime} is not positive")

    def excess(ell):
        return 3 * a_prime / ((2 * ell) ** 3 - radius ** 3) - v1_at_zero / 2

    closed_form = (radius ** 3 + 6 * a_prime / v1_at_zero) ** (1 / 3) / 2
    try:
        boundary = brentq(excess, radius / 2 * (1 + 1e-9), 4 * closed_form + radius, xtol=1e-14)
    except ValueError:
        logger.warning("bracketing the l~ boundary failed, using its closed form instead")
        boundary = closed_form
    return boundary * (1 + TILDE_ELL_RTOL)


def dyson_E_prime(pair, ell, a_prime=None, radius=None, tilde=None):
    """E'(l) = 3 a' / ((2 max(l, l~))^3 - R^3)."""
    a_prime = scattering_length_v1_prime(pair) if a_prime is None else a_prime
    radius = half_height_radius(pair.v1) if radius is None else radius
    tilde = tilde_ell(pair, a_prime, radius) if tilde is None else tilde
    reach = max(ell, tilde)
    return 3 * a_prime / ((2 * reach) ** 3 - radius ** 3)


def admissible_delta(E_prime, B):
    """min(1/2, E' / (6 B)), with the second argument infinite when B = 0."""
    if B < 0:
        raise ValueError(f"stability constant must be non-negative, got {B}")
    if B == 0:
        return 0.5
    return min(0.5, E_prime / (6 * B))


@dataclass(frozen=True)
class CertificateReport:
    a_prime: float
    R: float
    tilde_ell: float
    E_prime: float
    B: float
    delta: float
    ell: float
    c1: float
    lam: float
    a: float
    a1: float
    kappa: float
    M: float
    M_floor: int
    lemma1_margin: float
    w_positive: bool
    r1: float
    v1_at_zero: float

    def to_dict(self):
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        names = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in names})


def build_certificate(pair, B, kappa=DEFAULT_KAPPA):
    """
    The chain l~ -> l = max(10 l~, 2 r1) -> E'(l) -> delta -> c1 -> lambda = c1 / 2,
    then a of V1 - lambda V2 and a1 of V1. A two-body bound state at the
    certified lambda propagates as BoundStateDetected.
    """
    require_valid(pair)
    a_prime = scattering_length_v1_prime(pair)
    radius = half_height_radius(pair.v1)
    tilde = tilde_ell(pair, a_prime, radius)
    ell = max(10 * tilde, 2 * pair.r1)
    E_prime = dyson_E_prime(pair, ell, a_prime, radius, tilde)
    delta = admissible_delta(E_prime, B)
    c1 = (1 - SQRT3 * pair.r1 / ell) * delta
    lam = c1 / 2
    logger.info(f"l~ = {tilde:.6g}, l = {ell:.6g}, E' = {E_prime:.6g}, delta = {delta:.6g}")

    solution = solve_zero_energy(CompositePotential(pair, lam), half=True)
    a1 = scattering_length(CompositePotential(pair, 0.0), half=True)
    M = solution.a / a1 * 8 * kappa ** 2 + 1
    report = CertificateReport(
        a_prime=float(a_prime),
        R=float(radius),
        tilde_ell=float(tilde),
        E_prime=float(E_prime),
        B=float(B),
        delta=float(delta),
        ell=float(ell),
        c1=float(c1),
        lam=float(lam),
        a=float(solution.a),
        a1=float(a1),
        kappa=float(kappa),
        M=float(M),
        M_floor=int(np.floor(M)),
        lemma1_margin=float((1 - delta) * E_prime / 3 - delta * B),
        w_positive=solution.w_positive,
        r1=float(pair.r1),
        v1_at_zero=float(evaluate(pair.v1, 0.0)),
    )
    logger.info(f"certified lambda = {lam:.6g}, a = {solution.a:.8g}, a1 = {a1:.8g}")
    return report


########################################################################
#                                                                      #
#                          BOUND EVALUATION                            #
#                                                                      #
########################################################################


def occupation_quadratic(t, N, kappa, ell2, L):
    """(l2^3 / L^3) (t - N)^2 + N kappa^2 - t."""
    return ell2 ** 3 / L ** 3 * (t - N) ** 2 + N * kappa ** 2 - t


def occupation_argmin(N, kappa, ell2, L):
    """Exact minimiser over [0, N]: the vertex lies at N + L^3 / (2 l2^3) > N."""
    vertex = N + L ** 3 / (2 * ell2 ** 3)
    return float(np.clip(vertex, 0, N))


@dataclass(frozen=True)
class BoundEvaluation:
    rho: float
    epsilon: float
    N: float
    c_prime: float
    a: float
    ell0: float
    ell1: float
    ell2: float
    kappa: float
    L: float
    M: float
    q2: float
    lemma5_bound: float
    lemma5_gap: float
    lemma5_perturbation: float
    lemma5_hypothesis: bool
    lemma6_gap: float
    lemma6_perturbation: float
    lemma6_hypothesis: bool
    occupation_optimum: float
    occupation_value: float
    theorem1_bound: float
    reference_energy: float
    epsilon_below: Dict[str, bool] = field(default_factory=dict)

    @property
    def ratio(self):
        return self.theorem1_bound / self.reference_energy

    def lemma6_bound(self, k):
        """4 pi a / l2^3 k (k - 1) (1 - C' rho^eps) for k <= M, else the large-k form."""
        if k > self.M:
            return self.lemma6_large_k_bound(k)
        return FOUR_PI * self.a / self.ell2 ** 3 * k * (k - 1) * (1 - self.c_prime * self.rho ** self.epsilon)

    def lemma6_large_k_bound(self, k):
        """Half of the superadditive V1 bound: (1/2) k 4 kappa^2 4 pi a / l2^3 (1 - C' rho^eps)."""
        return (
            0.5 * k * 4 * self.kappa ** 2 * FOUR_PI * self.a / self.ell2 ** 3
            * (1 - self.c_prime * self.rho ** self.epsilon)
        )

    def to_dict(self):
        out = asdict(self)
        out["ratio"] = self.ratio
        out["lemma6_bound_k2"] = self.lemma6_bound(2)
        return out


def evaluate_bounds(cert, rho, epsilon, N, c_prime=1.0):
    if not 0 < epsilon < EPSILON_MAX:
        raise EpsilonOutOfRange(f"epsilon = {epsilon} is outside (0, 1/31)")
    a, a1 = cert.a, cert.a1
    small = rho ** epsilon
    ell1 = rho ** ((-1 + epsilon) / 3)
    ell0 = rho ** ((-1 + 5 * epsilon) / 3)
    kappa = rho ** -epsilon
    ell2 = ell1 * kappa
    L = (N / rho) ** (1 / 3)
    M = a / a1 * 8 * kappa ** 2 + 1
    q2 = (1 - small) / (1 + 5 * small) * EIGHT_PI * a / ell1 ** 3

    lemma5_gap = small * np.pi ** 2 / (2 * ell1 ** 2)
    lemma5_perturbation = 6 * a / ell0 ** 3 * (1 - small)
    lemma6_gap = small * np.pi ** 2 / ell2 ** 2
    lemma6_perturbation = M / 2 * q2

    t_star = occupation_argmin(N, kappa, ell2, L)
    prefactor = FOUR_PI * a / ell2 ** 3 * (1 - c_prime * small)
    theorem1 = prefactor * N * (kappa ** 2 - 1) / (1 + SQRT3 * cert.r1 / ell2)

    return BoundEvaluation(
        rho=float(rho),
        epsilon=float(epsilon),
        N=float(N),
        c_prime=float(c_prime),
        a=float(a),
        ell0=float(ell0),
        ell1=float(ell1),
        ell2=float(ell2),
        kappa=float(kappa),
        L=float(L),
        M=float(M),
        q2=float(q2),
        lemma5_bound=float((1 - small) * EIGHT_PI * a / ell1 ** 3),
        lemma5_gap=float(lemma5_gap),
        lemma5_perturbation=float(lemma5_perturbation),
        lemma5_hypothesis=bool(lemma5_gap >= 4 * lemma5_perturbation),
        lemma6_gap=float(lemma6_gap),
        lemma6_perturbation=float(lemma6_perturbation),
        lemma6_hypothesis=bool(lemma6_gap >= 4 * lemma6_perturbation),
        occupation_optimum=t_star,
        occupation_value=float(occupation_quadratic(t_star, N, kappa, ell2, L)),
        theorem1_bound=float(theorem1),
        reference_energy=float(FOUR_PI * a * rho * N),
        epsilon_below={"1/16": epsilon < 1 / 16, "1/22": epsilon < 1 / 22, "1/31": epsilon < 1 / 31},
    )


def deficit_exponent(cert, rhos, epsilon, N, c_prime=1.0):
    """Fitted exponent p of 1 - theorem1 / (4 pi a rho N) ~ rho^p."""
    deficits = [1 - evaluate_bounds(cert, rho, epsilon, N, c_prime).ratio for rho in rhos]
    return fit_power_law(rhos, deficits)


def bounds_sweep(cert, rhos, epsilon, N, c_prime=1.0):
    """Rows (rho, theorem1 bound, ratio to 4 pi a rho N)."""
    rows = []
    for rho in rhos:
        evaluation = evaluate_bounds(cert, rho, epsilon, N, c_prime)
        rows.append((float(rho), evaluation.theorem1_bound, evaluation.ratio))
    return rows


########################################################################
#                                                                      #
#                       INCLUSION-EXCLUSION COUNT                      #
#                                                                      #
########################################################################


@dataclass(frozen=True)
class OccupancyCount:
    k: int
    ell1: float
    ell2: float
    pair_term: float
    triple_term: float
    net: float
    kappa_correction: float
    exact_pairs: float
    exact_triples: float
    samples: int = 0
    mc_pairs: float = float("nan")
    mc_pairs_sigma: float = float("nan")
    mc_triples: float = float("nan")
    mc_triples_sigma: float = float("nan")
    mc_exactly_two: float = float("nan")
    mc_exactly_two_sigma: float = float("nan")

    @property
    def pairs_agree(self):
        return abs(self.mc_pairs - self.exact_pairs) <= 3 * self.mc_pairs_sigma + 3 / max(self.samples, 1)

    @property
    def triples_agree(self):
        return abs(self.mc_triples - self.exact_triples) <= 3 * self.mc_triples_sigma + 3 / max(self.samples, 1)

    @property
    def exactly_two_bounded(self):
        return self.mc_exactly_two >= self.net - 3 * self.mc_exactly_two_sigma

    def to_dict(self):
        out = asdict(self)
        if self.samples:
            out.update(
                pairs_agree=self.pairs_agree,
                triples_agree=self.triples_agree,
                pair_term_is_lower_bound=self.pair_term <= self.exact_pairs,
                triple_term_is_upper_bound=self.triple_term >= self.exact_triples,
                exactly_two_bounded=self.exactly_two_bounded,
            )
        return out


def _occupancy_batch(rng, k, ell1, ell2, size):
    """Same-full-cell pair and triple counts and exactly-two cells for size samples."""
    shifts = rng.uniform(0, 1, (size, 1, 3))
    points = rng.uniform(0, ell2, (size, k, 3))
    index = np.floor(points / ell1 + shifts)
    # cell j spans [l1 (j - u), l1 (j + 1 - u)] on each axis
    full = np.all((index - shifts >= 0) & (index + 1 - shifts <= ell2 / ell1 + 1e-12), axis=-1)
    same = np.all(index[:, :, None, :] == index[:, None, :, :], axis=-1)
    same &= full[:, :, None] & full[:, None, :]
    upper = np.triu(np.ones((k, k), dtype=bool), 1)
    pairs = np.sum(same & upper, axis=(1, 2))
    if k >= 3:
        idx = np.arange(k)
        triple_mask = (idx[:, None, None] < idx[None, :, None]) & (
            idx[None, :, None] < idx[None, None, :]
        )
        # same cell is transitive, so (a, b) and (b, c) suffice
        triples = np.sum(
            same[:, :, :, None] & same[:, None, :, :] & triple_mask, axis=(1, 2, 3)
        )
    else:
        triples = np.zeros(size)
    occupancy = np.sum(same, axis=2)
    exactly_two = np.sum(full & (occupancy == 2), axis=1) / 2
    return pairs, triples, exactly_two


def inclusion_exclusion_count(k, ell1, ell2, samples=0, seed=0, batch=10 ** 5):
    """
    Closed-form pair and triple weights of the occupancy count of l1 cells in an
    l2 box, their exact expectations, and optionally a Monte Carlo estimate over
    random points and random grid shifts.
    """
    if ell2 <= 2 * ell1:
        raise DegenerateGeometry(f"l2 = {ell2} must exceed 2 l1 = {2 * ell1}")
    if k < 2:
        raise ValueError(f"need at least two particles, got {k}")
    ratio = ell1 / ell2
    pair_term = comb(k, 2) * (1 - 2 * ratio) ** 3 * ratio ** 3
    triple_term = comb(k, 3) * ratio ** 6
    net = pair_term - 3 * triple_term
    count = dict(
        k=int(k),
        ell1=float(ell1),
        ell2=float(ell2),
        pair_term=float(pair_term),
        triple_term=float(triple_term),
        net=float(net),
        kappa_correction=float((1 - net / (comb(k, 2) * ratio ** 3)) / ratio),
        exact_pairs=float(comb(k, 2) * (1 - ratio) ** 3 * ratio ** 3),
        exact_triples=float(comb(k, 3) * (1 - ratio) ** 3 * ratio ** 6),
    )
    if samples <= 0:
        return OccupancyCount(**count)

    sizes = [batch] * (samples // batch) + ([samples % batch] if samples % batch else [])
    batches = parallel_map(
        lambda job: _occupancy_batch(task_rng(seed, k, job[0]), k, ell1, ell2, job[1]),
        list(enumerate(sizes)),
    )
    pairs, triples, exactly_two = (np.concatenate(parts) for parts in zip(*batches))

    def stats(values, expected=0.0):
        # a rare event may never show up; its spread then comes from the exact rate
        spread = max(np.var(values, ddof=1), expected)
        return float(np.mean(values)), float(np.sqrt(spread / values.size))

    count["samples"] = int(samples)
    count["mc_pairs"], count["mc_pairs_sigma"] = stats(pairs, count["exact_pairs"])
    count["mc_triples"], count["mc_triples_sigma"] = stats(triples, count["exact_triples"])
    count["mc_exactly_two"], count["mc_exactly_two_sigma"] = stats(exactly_two)
    return OccupancyCount(**count)


########################################################################
#                                                                      #
#                          STABILITY PROBE                             #
#                                                                      #
########################################################################


def configuration_energy(v0, positions):
    """Sum over pairs i < j of V0(|x_i - x_j|) in free space."""
    if len(positions) < 2:
        return 0.0
    return float(np.sum(evaluate(v0, pdist(positions))))


def pair_distance_scan(v0, r_max, points=10 ** 6):
    """Exhaustive n = 2 minimum: min(0, min_r V0(r)) and the minimising distance."""
    radii = np.union1d(np.linspace(0.0, r_max, points), v0.breakpoints)
    values = evaluate(v0, radii)
    best = int(np.argmin(values))
    if values[best] >= 0:
        return 0.0, float("inf")
    return float(values[best]), float(radii[best])


LATTICE_BASES = {
    "sc": np.array([[0.0, 0.0, 0.0]]),
    "bcc": np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]]),
    "fcc": np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]),
}
NEAREST_NEIGHBOUR = {"sc": 1.0, "bcc": np.sqrt(3) / 2, "fcc": 1 / np.sqrt(2)}


def lattice_cluster(kind, n, spacing):
    """The n sites nearest the origin of a cubic lattice with nearest-neighbour distance spacing."""
    reach = int(np.ceil(n ** (1 / 3))) + 1
    cells = np.array(np.meshgrid(*[np.arange(-reach, reach + 1)] * 3, indexing="ij")).reshape(3, -1).T
    sites = (cells[:, None, :] + LATTICE_BASES[kind][None, :, :]).reshape(-1, 3)
    order = np.lexsort((sites[:, 2], sites[:, 1], sites[:, 0], np.linalg.norm(sites, axis=1)))
    return sites[order[:n]] * spacing / NEAREST_NEIGHBOUR[kind]


def lattice_minimum(v0, n, r0, r1, spacings=40):
    best = (0.0, "spread")
    for kind in LATTICE_BASES:
        for spacing in np.linspace(r0 / 2, r1, spacings):
            energy = configuration_energy(v0, lattice_cluster(kind, n, spacing))
            if energy < best[0]:
                best = (energy, f"{kind} spacing {spacing:.6g}")
    return best


def anneal_chains(v0, n, r1, budget, rngs, energy_scale):
    """
    Independent Metropolis chains of single-particle moves in a cube of side
    4 r1 n^(1/3), one per generator in rngs, with a geometric cooling schedule
    over budget sweeps. The chains move in lockstep so that every move costs
    one potential evaluation for all of them. Returns the lowest energy each
    chain has seen.
    """
    side = 4 * r1 * n ** (1 / 3)
    positions = np.stack([rng.uniform(0, side, (n, 3)) for rng in rngs])
    pair = evaluate(v0, np.linalg.norm(positions[:, :, None, :] - positions[:, None, :, :], axis=-1))
    diagonal = np.arange(n)
    pair[:, diagonal, diagonal] = 0.0
    energy = pair.sum(axis=(1, 2)) / 2
    best = energy.copy()
    temperatures = energy_scale * np.geomspace(1.0, 1e-4, budget)
    step = 0.5 * r1
    for temperature in temperatures:
        # one draw per chain and sweep keeps every chain on its own stream
        kicks = step * np.stack([rng.standard_normal((n, 3)) for rng in rngs])
        draws = np.stack([rng.uniform(size=n) for rng in rngs])
        for i in range(n):
            trial = positions[:, i] + kicks[:, i]
            inside = np.all((trial >= 0) & (trial <= side), axis=1)
            row = evaluate(v0, np.linalg.norm(positions - trial[:, None, :], axis=-1))
            row[:, i] = 0.0
            change = row.sum(axis=1) - pair[:, i].sum(axis=1)
            with np.errstate(over="ignore"):
                accept = inside & ((change <= 0) | (draws[:, i] < np.exp(-change / temperature)))
            positions[accept, i] = trial[accept]
            pair[accept, i, :] = row[accept]
            pair[accept, :, i] = row[accept]
            energy = energy + np.where(accept, change, 0.0)
            best = np.minimum(best, energy)
    return best


def anneal(v0, n, r1, budget, rng, energy_scale):
    """A single annealing chain; returns the lowest energy seen."""
    return float(anneal_chains(v0, n, r1, budget, [rng], energy_scale)[0])



@dataclass(frozen=True)
class StabilityEstimate:
    B_hat: float
    minima: Tuple[Tuple[int, float, str], ...]
    collapse: bool
    n_max: int
    budget: int
    seed: int

    @property
    def per_particle(self):
        return {n: energy / n for n, energy, _ in self.minima}

    def to_dict(self):
        return {
            "B_hat": self.B_hat,
            "minima": [{"n": n, "energy": e, "source": s} for n, e, s in self.minima],
            "per_particle": {str(n): e for n, e in self.per_particle.items()},
            "collapse": self.collapse,
            "n_max": self.n_max,
            "budget": self.budget,
            "seed": self.seed,
        }


def collapse_flag(per_particle, n_max):
    """
    Energy per particle keeping the complete-graph growth e_n ~ -(n - 1):
    e_nmax <= 0.9 (n_max - 1) / (n_half - 1) e_nhalf with both negative.
    """
    n_half = int(np.ceil(n_max / 2))
    if n_half < 2:
        return False
    e_max, e_half = per_particle[n_max], per_particle[n_half]
    return bool(e_max < 0 and e_half < 0 and e_max <= 0.9 * (n_max - 1) / (n_half - 1) * e_half)


def probe_stability(
    pair, n_max, budget=ANNEALING_BUDGET, seed=0, restarts=ANNEALING_RESTARTS, threads=None
):
    """
    Lower estimate B^ = max_n (-min_n / n) of the stability constant of V0 = V1 - V2,
    from the exact pair scan at n = 2 and from annealing restarts plus lattice
    clusters for n >= 3. Never a proof of stability.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    if restarts < 1:
        raise ValueError(f"need at least one annealing restart, got {restarts}")
    require_valid(pair)
    v0 = stability_potential(pair)
    energy_scale = max(maximum(pair.v1), maximum(pair.v2), 1e-12)

    sizes = list(range(3, n_max + 1))
    # the restarts of one n run as lockstep chains, each seeded by (n, restart)
    annealed = parallel_map(
        lambda n: anneal_chains(
            v0, n, pair.r1, budget, [task_rng(seed, n, restart) for restart in range(restarts)], energy_scale
        ),
        sizes,
        threads,
    )

    pair_energy, distance = pair_distance_scan(v0, pair.r1)
    minima = [(2, pair_energy, f"pair scan at r = {distance:.6g}")]
    for n, runs in zip(sizes, annealed):
        best = (min(0.0, float(np.min(runs))), "annealing")
        lattice = lattice_minimum(v0, n, pair.r0, pair.r1)
        minima.append((n, *min(best, lattice)))
        logger.debug(f"n = {n}: minimum {minima[-1][1]:.6g} from {minima[-1][2]}")

    per_particle = {n: e / n for n, e, _ in minima}
    b_hat = max(0.0, max(-e for e in per_particle.values()))
    collapse = collapse_flag(per_particle, n_max)
    if collapse:
        logger.warning(
            f"energy per particle keeps falling like -(n - 1) up to n = {n_max}: "
            "V1 - V2 looks catastrophic at this size"
        )
    logger.info(f"stability probe: B^ = {b_hat:.6g} from n <= {n_max}")
    return StabilityEstimate(float(b_hat), tuple(minima), collapse, int(n_max), int(budget), int(seed))
