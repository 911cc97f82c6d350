"""acceptance.py

    Desk-scale acceptance drivers. Each driver runs one group of checks and
    returns a JSON-ready dict with a boolean "passed"; run_suite collects
    them for a quick or a full budget.

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
import time

import numpy as np

from .certificate import (
    build_certificate,
    evaluate_bounds,
    inclusion_exclusion_count,
    probe_stability,
)
from .common_utils import EIGHT_PI, parallel_map
from .config import REFERENCE_PAIR_PATH, SQUARE_BARRIER_PAIR_PATH, UNSTABLE_PAIR_PATH
from .partition import (
    constant_wavefunction,
    localized_energy_split,
    theorem2_bound_chain,
    verify_convolution_identity,
)
from .perturbation import verify_perturbation_lemma
from .potential import CompositePotential, Piece, RadialPotential, load_pair, square_barrier
from .scattering import (
    convergence_order,
    scattering_length,
    square_barrier_scattering_length,
)
from .spectral import (
    lemma4_consistency,
    resolution_radius,
    two_body_box_ground,
    two_body_torus_ground,
)

logger = logging.getLogger(__name__)

BUDGETS = {
    "quick": {
        "perturb_trials": 200,
        "perturb_dims": (50,),
        "partition_samples": 2000,
        "torus_extents": (3.0, 4.0),
        "box_points": None,
        "ie_samples": 10 ** 5,
        "probe_n_max": 6,
        "probe_budget": 100,
        "probe_restarts": 4,
    },
    "full": {
        "perturb_trials": 1000,
        "perturb_dims": (100, 200),
        "partition_samples": 10 ** 4,
        "torus_extents": (4.0, 6.0, 8.0),
        "box_points": 10,
        "ie_samples": 10 ** 6,
        "probe_n_max": 12,
        "probe_budget": 2000,
        "probe_restarts": 50,
    },
}


def smooth_bump():
    """0.5 (1 - r^2)^2 on [0, 1]: weak and smooth, so small tori already resolve it."""
    return RadialPotential((Piece(0.0, 1.0, (0.5, 0.0, -1.0, 0.0, 0.5)),))


def _rel(x, y):
    return abs(x - y) / abs(y)


########################################################################
#                                                                      #
#                              DRIVERS                                 #
#                                                                      #
########################################################################


def check_scattering():
    barrier = square_barrier(8.0, 1.0)
    computed = scattering_length(barrier, half=True)
    exact = square_barrier_scattering_length(8.0, 1.0, half=True)
    order = convergence_order(barrier, half=True)
    return {
        "a": computed,
        "closed_form": exact,
        "relative_error": _rel(computed, exact),
        "observed_order": order,
        "passed": _rel(computed, exact) <= 1e-8 and order >= 3.5,
    }


def check_lemma4(pair=None, lam=None, n=4000, threads=None):
    """Neumann ball energies against 3a/l0^3; lam defaults to the certified coupling at B = 0."""
    pair = load_pair(REFERENCE_PAIR_PATH) if pair is None else pair
    lam = build_certificate(pair, 0.0).lam if lam is None else lam
    report = lemma4_consistency(CompositePotential(pair, lam), n=n, threads=threads)
    report["lambda"] = lam
    report["passed"] = bool(
        report["within_tolerance"]
        and abs(report["correction_exponent"] - 1.0) <= 0.3
        and abs(report["h_squared_relative_deviation"]) <= 1e-2
    )
    return report


def check_lemma5(budget="quick", threads=None, v=None, extents=None):
    """
    E L^3 / (8 pi a) on the torus, by default for a weak smooth bump, plus the
    6-D box for the full budget. The grid keeps six points per resolution radius.
    """
    v = smooth_bump() if v is None else v
    extents = BUDGETS[budget]["torus_extents"] if extents is None else extents
    a = scattering_length(v, half=True)
    resolution = resolution_radius(v)

    def one(extent):
        n = int(np.ceil(6 * extent / resolution))
        result = two_body_torus_ground(v, extent, n)
        return {
            "extent": extent,
            "n": n,
            "energy": result.ground,
            "extrapolated": result.extrapolated,
            "ratio": result.best_estimate * extent ** 3 / (EIGHT_PI * a),
        }

    rows = parallel_map(one, extents, threads)
    report = {"a": a, "torus": rows, "passed": abs(rows[-1]["ratio"] - 1) <= 0.1}

    points = BUDGETS[budget]["box_points"]
    if points:
        side = extents[0]
        box = two_body_box_ground(v, side, points)
        report["box"] = {
            "side": side,
            "n": points,
            "energy": box.ground,
            "extrapolated": box.extrapolated,
            "ratio": box.best_estimate * side ** 3 / (EIGHT_PI * a),
        }
    return report


def check_perturbation(budget, seed, threads=None):
    runs = []
    for dim in BUDGETS[budget]["perturb_dims"]:
        report = verify_perturbation_lemma(
            BUDGETS[budget]["perturb_trials"], dim, seed, threads=threads
        )
        runs.append({"dim": dim, **report.to_dict()})
    return {
        "runs": runs,
        "passed": all(
            run["passed"] and run["worst_scaled_slack"] >= -1e-10 for run in runs
        ),
    }


def check_partition(
    budget="quick", seed=0, threads=None, pair=None, cell=4.0, samples=None, points=256, delta=0.5
):
    """Convolution identity, the pointwise chain at l = max(cell, 2 r1), and a constant-state split."""
    samples = BUDGETS[budget]["partition_samples"] if samples is None else samples
    identity = verify_convolution_identity(cell, samples, seed, points=points)
    pair = load_pair(REFERENCE_PAIR_PATH) if pair is None else pair
    chain = theorem2_bound_chain(pair, delta, max(cell, 2 * pair.r1))
    state = constant_wavefunction(8, 4.0)
    left, right = localized_energy_split(state, 2.0, smooth_bump(), threads=threads)
    return {
        "convolution": identity.to_dict(),
        "chain": chain.to_dict(),
        "energy_split": {"left": left, "right": right},
        "passed": identity.passed
        and chain.admissible
        and abs(left - right) <= 1e-10 * abs(right),
    }


def check_certificate():
    pair = load_pair(REFERENCE_PAIR_PATH)
    certs = [build_certificate(pair, B) for B in (0.0, 0.5, 1.0, 2.0)]
    deltas = [cert.delta for cert in certs]
    base = certs[0]

    # independent recomputation of each stage from closed forms
    a_prime = square_barrier_scattering_length(4.0, 1.0, half=False)
    tilde = (base.R ** 3 + 6 * a_prime / base.v1_at_zero) ** (1 / 3) / 2
    ell = max(10 * tilde, 2 * pair.r1)
    E_prime = 3 * a_prime / ((2 * ell) ** 3 - base.R ** 3)
    c1 = (1 - np.sqrt(3) * pair.r1 / ell) * 0.5
    recomputed = {
        "a_prime": _rel(base.a_prime, a_prime),
        "tilde_ell": _rel(base.tilde_ell, tilde),
        "E_prime": _rel(base.E_prime, E_prime),
        "c1": _rel(base.c1, c1),
        "lambda": _rel(base.lam, c1 / 2),
    }
    return {
        "certificate": base.to_dict(),
        "deltas": deltas,
        "relative_differences": recomputed,
        "passed": base.delta == 0.5
        and all(x > y for x, y in zip(deltas, deltas[1:]))
        and all(0 < cert.lam <= 0.25 and cert.w_positive for cert in certs)
        and all(diff <= 1e-8 for diff in recomputed.values()),
    }


def check_inclusion_exclusion(budget, seed):
    rows = []
    for k in (2, 3, 5):
        for ratio in (0.05, 0.1):
            count = inclusion_exclusion_count(
                k, ratio, 1.0, samples=BUDGETS[budget]["ie_samples"], seed=seed
            )
            rows.append(count.to_dict())
    return {
        "rows": rows,
        "passed": all(
            row["pairs_agree"]
            and row["triples_agree"]
            and row["pair_term_is_lower_bound"]
            and row["triple_term_is_upper_bound"]
            and row["exactly_two_bounded"]
            for row in rows
        ),
    }


def check_bounds():
    cert = build_certificate(load_pair(REFERENCE_PAIR_PATH), 0.0)
    evaluations = [evaluate_bounds(cert, rho, 0.03, 1e6) for rho in (1e-3, 1e-4, 1e-5)]
    ratios = [e.ratio for e in evaluations]
    return {
        "ratios": ratios,
        "passed": all(e.theorem1_bound < e.reference_energy for e in evaluations)
        and all(x < y for x, y in zip(ratios, ratios[1:]))
        and all(e.occupation_optimum == e.N for e in evaluations),
    }


def check_stability(budget, seed, threads=None):
    settings = BUDGETS[budget]
    options = dict(
        budget=settings["probe_budget"],
        seed=seed,
        restarts=settings["probe_restarts"],
        threads=threads,
    )
    free = probe_stability(load_pair(SQUARE_BARRIER_PAIR_PATH), settings["probe_n_max"], **options)
    well = probe_stability(load_pair(REFERENCE_PAIR_PATH), 2, **options)
    unstable = probe_stability(load_pair(UNSTABLE_PAIR_PATH), settings["probe_n_max"], **options)
    b_two = -well.minima[0][1] / 2
    return {
        "free_B_hat": free.B_hat,
        "well_B_hat_2": b_two,
        "unstable_collapse": unstable.collapse,
        "passed": free.B_hat == 0 and abs(b_two - 0.5) <= 1e-6 and unstable.collapse,
    }


########################################################################
#                                                                      #
#                                SUITE                                 #
#                                                                      #
########################################################################


def run_suite(seed, budget="quick", threads=None):
    if budget not in BUDGETS:
        raise ValueError(f"unknown budget {budget}")
    checks = [
        ("scattering", check_scattering),
        ("lemma4", lambda: check_lemma4(threads=threads)),
        ("lemma5", lambda: check_lemma5(budget, threads)),
        ("perturbation", lambda: check_perturbation(budget, seed, threads)),
        ("partition", lambda: check_partition(budget, seed, threads)),
        ("certificate", check_certificate),
        ("inclusion_exclusion", lambda: check_inclusion_exclusion(budget, seed)),
        ("bounds", check_bounds),
        ("stability", lambda: check_stability(budget, seed, threads)),
    ]
    results = {}
    for name, check in checks:
        start = time.perf_counter()
        results[name] = check()
        results[name]["seconds"] = time.perf_counter() - start
        level = logging.INFO if results[name]["passed"] else logging.WARNING
        logger.log(level, f"{name}: {'pass' if results[name]['passed'] else 'FAIL'}")
    return {
        "budget": budget,
        "seed": seed,
        "criteria": results,
        "passed": {name: result["passed"] for name, result in results.items()},
        "all_passed": all(result["passed"] for result in results.values()),
    }
