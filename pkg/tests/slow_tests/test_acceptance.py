"""test_acceptance.py

    The heavier eigenvalue runs, the stability probe and the quick
    acceptance suite end to end. Run them with

    pytest tests/slow_tests

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

import json

import numpy as np
import pytest

import bose_bounds
from bose_code.acceptance import (
    check_lemma4,
    check_lemma5,
    check_stability,
    smooth_bump,
)
from bose_code.certificate import probe_stability
from bose_code.config import REFERENCE_PAIR_PATH
from bose_code.spectral import (
    two_body_box_ground,
    two_body_torus_ground,
    torus_convergence,
)


def test_torus_extrapolation_improves_on_the_grids(c5_bump):
    L = 2.5
    convergence = torus_convergence(c5_bump, L, (16, 24, 36))
    fine = two_body_torus_ground(c5_bump, L, 54, extrapolate=False).ground
    energies = convergence["energies"]
    assert abs(convergence["extrapolated"] - fine) < abs(energies[0] - fine)
    assert 1.8 <= convergence["observed_order"] <= 2.6


def test_torus_energy_matches_scattering_length():
    report = check_lemma5("quick")
    assert report["passed"]
    ratios = [row["ratio"] for row in report["torus"]]
    assert all(0.9 <= ratio <= 1.1 for ratio in ratios)


def test_six_dimensional_box_refines():
    bump = smooth_bump()
    coarse = two_body_box_ground(bump, 3.0, 6).ground
    fine = two_body_box_ground(bump, 3.0, 8).ground
    assert coarse > 0
    assert fine == pytest.approx(coarse, rel=0.2)


def test_ball_energies_against_scattering_length():
    report = check_lemma4()
    assert report["passed"]
    assert len(report["rows"]) == 3


def test_unstable_pair_collapses(unstable_pair):
    estimate = probe_stability(unstable_pair, 6, budget=100, seed=0, restarts=4)
    assert estimate.collapse
    energies = [energy for _, energy, _ in estimate.minima]
    assert energies[-1] < energies[0]


def test_reference_pair_is_bounded_below(reference_pair):
    estimate = probe_stability(reference_pair, 4, budget=100, seed=2, restarts=4)
    # six pairs at most, each no lower than -1
    assert 0.5 <= estimate.B_hat <= 1.5 + 1e-12


def test_stability_check():
    assert check_stability("quick", 0)["passed"]


def test_verify_all_quick(tmp_path):
    out = tmp_path.joinpath("all.json")
    with pytest.raises(SystemExit) as exit_info:
        bose_bounds.main(["verify", "all", "--budget", "quick", "--seed", "0", "--out", str(out)])
    with open(out) as report_file:
        report = json.load(report_file)["report"]
    assert report["passed"] == {name: True for name in report["passed"]}
    assert report["passed_all"]
    assert exit_info.value.code == 0


def test_torus_sweep_from_the_command_line(tmp_path):
    out = tmp_path.joinpath("torus.csv")
    with pytest.raises(SystemExit) as exit_info:
        bose_bounds.main(
            ["eig", "--kind", "torus", "--pair", str(REFERENCE_PAIR_PATH), "--sweep", "5,6",
             "--n", "24", "--format", "csv", "--out", str(out)]
        )
    assert exit_info.value.code == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert rows.shape == (2, 3)
    assert np.all(rows[:, 1] > 0)
