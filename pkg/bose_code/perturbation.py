"""perturbation.py

    The gap perturbation bound

        inf spec (A + X) >= <psi_0, X psi_0> - 2 X_inf^2 / gamma    (gamma >= 4 X_inf)

    for a non-negative A with simple constant ground state and a diagonal X,
    as a formula and as a property fuzzed against dense diagonalisation.

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
from dataclasses import asdict, dataclass, field
from functools import reduce
from typing import List

import numpy as np
import scipy.sparse as sp

from .common_utils import HypothesisViolated, parallel_map, task_rng
from .spectral import kron_sum, neumann_laplacian_1d

logger = logging.getLogger(__name__)

INSTANCE_KINDS = ("random", "boundary", "adversarial")
HYPOTHESIS_RTOL = 1e-12
VECTOR_TOL = 1e-8


@dataclass(frozen=True)
class PerturbationInstance:
    base: np.ndarray
    gap: float
    x_diag: np.ndarray
    x_inf: float
    mean: float

    @property
    def dim(self):
        return self.x_diag.size


def make_instance(base, x_diag):
    """Checks the kernel of base and measures gap, x_inf and mean."""
    base = base.toarray() if sp.issparse(base) else np.asarray(base, dtype=float)
    x_diag = np.asarray(x_diag, dtype=float)
    spectrum = np.linalg.eigvalsh(base)
    scale = max(abs(spectrum[-1]), 1.0)
    if np.linalg.norm(base @ np.ones(len(base))) > 1e-12 * scale * len(base):
        raise ValueError("the constant vector must be in the kernel of the base operator")
    if spectrum[1] <= 1e-12 * scale:
        raise ValueError("the zero eigenvalue of the base operator must be simple")
    return PerturbationInstance(
        base, float(spectrum[1]), x_diag, float(np.max(np.abs(x_diag))), float(np.mean(x_diag))
    )


def hypothesis_holds(inst):
    return inst.gap >= 4 * inst.x_inf * (1 - HYPOTHESIS_RTOL)


def perturb_lower_bound(inst):
    if not hypothesis_holds(inst):
        raise HypothesisViolated(
            f"gap {inst.gap} is below 4 x_inf = {4 * inst.x_inf}; the bound is not claimed there"
        )
    return inst.mean - 2 * inst.x_inf ** 2 / inst.gap


########################################################################
#                                                                      #
#                          RANDOM INSTANCES                            #
#                                                                      #
########################################################################


def grid_graph_laplacian(dim, two_dimensional):
    """Neumann Laplacian of a connected path or rectangular grid with dim vertices."""
    if two_dimensional:
        side = max((d for d in range(2, int(np.sqrt(dim)) + 1) if dim % d == 0), default=None)
        if side is not None:
            return kron_sum([neumann_laplacian_1d(side, 1.0), neumann_laplacian_1d(dim // side, 1.0)])
    return neumann_laplacian_1d(dim, 1.0)


def random_instance(rng, dim, kind="random", x_fraction=0.25):
    """
    A grid Laplacian rescaled to a log-uniform gap in [1e-2, 1e2] plus a diagonal
    bounded by x_fraction * gap. kind 'boundary' puts one entry exactly on the
    bound, 'adversarial' uses -bound on one half and +bound on the other.
    """
    if kind not in INSTANCE_KINDS:
        raise ValueError(f"unknown instance kind {kind}")
    lap = grid_graph_laplacian(dim, bool(rng.integers(2))).toarray()
    target = 10 ** rng.uniform(-2, 2)
    base = lap * (target / np.linalg.eigvalsh(lap)[1])
    gap = np.linalg.eigvalsh(base)[1]
    bound = x_fraction * gap

    if kind == "adversarial":
        x_diag = np.full(dim, bound)
        x_diag[rng.permutation(dim)[: dim // 2]] = -bound
    else:
        x_diag = rng.uniform(-bound, bound, dim)
        if kind == "boundary":
            x_diag[rng.integers(dim)] = bound * rng.choice([-1.0, 1.0])
    return make_instance(base, x_diag)


########################################################################
#                                                                      #
#                          TRIALS AND REPORTS                          #
#                                                                      #
########################################################################


@dataclass(frozen=True)
class TrialResult:
    witness: dict
    gap: float
    x_inf: float
    mean: float
    ground: float
    bound: float
    slack: float
    psi_prime_norm: float
    psi_prime_bound: float
    intermediate_bound: float
    ground_below_x_inf: bool
    factor: float
    at_boundary: bool
    failures: tuple

    @property
    def violated(self):
        return bool(self.failures)


def check_instance(inst, witness=None):
    """
    Dense check of the bound, of E_0 <= x_inf, and of
    |psi'| <= x_inf / (gamma - E_0 - x_inf) for the ground vector psi_0 + psi'
    normalised by <psi_0, psi'> = 0.
    """
    bound = perturb_lower_bound(inst)
    values, vectors = np.linalg.eigh(inst.base + np.diag(inst.x_diag))
    ground, vector = float(values[0]), vectors[:, 0]
    psi0 = np.full(inst.dim, 1 / np.sqrt(inst.dim))
    tol = 1e-10 * max(inst.gap, 1.0)

    overlap = psi0 @ vector
    psi_prime = vector / overlap - psi0 if abs(overlap) > 0 else np.full(inst.dim, np.inf)
    psi_prime_norm = float(np.linalg.norm(psi_prime))
    denominator = inst.gap - ground - inst.x_inf
    psi_prime_bound = inst.x_inf / denominator if denominator > 0 else np.inf
    intermediate = (
        inst.mean - inst.x_inf ** 2 / denominator if denominator > 0 else -np.inf
    )

    failures = []
    if ground < bound - tol:
        failures.append("lower bound")
    if psi_prime_norm > psi_prime_bound + VECTOR_TOL * (1 + psi_prime_bound):
        failures.append("psi' norm")
    if ground > inst.x_inf + tol:
        failures.append("E0 <= x_inf")
    if failures:
        logger.warning(f"perturbation bound violated ({failures}) for {witness}")

    return TrialResult(
        witness=witness or {},
        gap=inst.gap,
        x_inf=inst.x_inf,
        mean=inst.mean,
        ground=ground,
        bound=float(bound),
        slack=float(ground - bound),
        psi_prime_norm=psi_prime_norm,
        psi_prime_bound=float(psi_prime_bound),
        intermediate_bound=float(intermediate),
        ground_below_x_inf=ground <= inst.x_inf + tol,
        factor=float((inst.mean - ground) * inst.gap / inst.x_inf ** 2) if inst.x_inf else 0.0,
        at_boundary=abs(4 * inst.x_inf - inst.gap) <= 1e-9 * inst.gap,
        failures=tuple(failures),
    )


@dataclass
class VerificationReport:
    trials: int = 0
    violations: List[dict] = field(default_factory=list)
    worst_slack: float = np.inf
    worst_scaled_slack: float = np.inf
    hypothesis_boundary_cases: int = 0
    sharpest_factor: float = -np.inf
    witnesses: List[dict] = field(default_factory=list)

    @classmethod
    def from_trial(cls, result):
        violations = (
            [{**result.witness, "failures": list(result.failures)}] if result.violated else []
        )
        return cls(
            trials=1,
            violations=violations,
            worst_slack=result.slack,
            worst_scaled_slack=result.slack / max(result.gap, 1.0),
            hypothesis_boundary_cases=int(result.at_boundary),
            sharpest_factor=result.factor,
            witnesses=[result.witness] if result.violated else [],
        )

    def merge(self, other):
        return VerificationReport(
            trials=self.trials + other.trials,
            violations=self.violations + other.violations,
            worst_slack=min(self.worst_slack, other.worst_slack),
            worst_scaled_slack=min(self.worst_scaled_slack, other.worst_scaled_slack),
            hypothesis_boundary_cases=self.hypothesis_boundary_cases
            + other.hypothesis_boundary_cases,
            sharpest_factor=max(self.sharpest_factor, other.sharpest_factor),
            witnesses=self.witnesses + other.witnesses,
        )

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        out = asdict(self)
        out["violations"] = len(self.violations)
        out["violating_trials"] = self.violations
        out["passed"] = self.passed
        return out


def run_trial(seed, trial, dim, kind, x_fraction=0.25):
    witness = {"seed": int(seed), "trial": int(trial), "dim": int(dim), "kind": kind,
               "x_fraction": float(x_fraction)}
    inst = random_instance(task_rng(seed, trial), dim, kind, x_fraction)
    return check_instance(inst, witness)


def replay_trial(witness):
    """Re-runs exactly the trial a witness record describes."""
    return run_trial(
        witness["seed"],
        witness["trial"],
        witness["dim"],
        witness["kind"],
        witness.get("x_fraction", 0.25),
    )


def verify_perturbation_lemma(
    trials, dim, seed, x_fraction=0.25, kinds=INSTANCE_KINDS, threads=None
):
    """
    Fuzzes the bound over trials random instances; trial t uses kind
    kinds[t % len(kinds)] and a generator derived from (seed, t) only.
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    if x_fraction > 0.25:
        raise HypothesisViolated(
            f"x_inf = {x_fraction} gamma exceeds gamma / 4; the bound is not claimed there"
        )
    results = parallel_map(
        lambda t: run_trial(seed, t, dim, kinds[t % len(kinds)], x_fraction),
        range(trials),
        threads,
    )
    report = reduce(VerificationReport.merge, map(VerificationReport.from_trial, results))
    logger.info(
        f"perturbation fuzzing: {report.trials} trials, {len(report.violations)} violations, "
        f"worst slack {report.worst_slack:.3e}, sharpest factor {report.sharpest_factor:.3f}"
    )
    return report
