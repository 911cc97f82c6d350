import json

import numpy as np
import pytest

from bose_code.common_utils import ValidationError
from bose_code.potential import (
    CompositePotential,
    Piece,
    PotentialPair,
    RadialPotential,
    combine,
    dump_pair,
    evaluate,
    load_pair,
    maximum,
    pair_content_hash,
    require_valid,
    square_barrier,
    validate_pair,
    zero_potential,
)


@pytest.mark.parametrize(
    "r, value",
    [
        (0.5, 4.0),
        (1.0, 4.0),
        (2.0, 0.0),
        (1 + 1e-12, 0.0),
    ],
)
def test_evaluate_square_barrier(r, value):
    assert evaluate(square_barrier(4.0, 1.0), r) == value


def test_evaluate_is_vectorised():
    values = evaluate(square_barrier(4.0, 1.0), np.array([0.0, 0.5, 1.5]))
    assert values.tolist() == [4.0, 4.0, 0.0]


def test_composite_with_zero_coupling_is_v1(reference_pair):
    radii = np.linspace(0, 3, 301)
    composite = CompositePotential(reference_pair, 0.0)
    assert np.array_equal(evaluate(composite, radii), evaluate(reference_pair.v1, radii))


def test_composite_support_is_r1(barrier_pair):
    assert CompositePotential(barrier_pair, 0.3).support_radius == 2.0


@pytest.mark.parametrize("lam", [0.0, 0.25, 0.5, 1.0])
def test_composite_bounded_below(reference_pair, lam):
    radii = np.linspace(0, 3, 3001)
    values = evaluate(CompositePotential(reference_pair, lam), radii)
    assert values.min() >= -lam * maximum(reference_pair.v2)


def test_support_exactness():
    v = RadialPotential((Piece(0.0, 1.0, (1.0, -1.0)),))
    assert v.support_radius == 1.0
    assert np.all(evaluate(v, 1.0 + np.geomspace(1e-12, 10, 50)) == 0)


def test_gaps_are_filled_and_trailing_zeros_dropped():
    v = RadialPotential((Piece(0.0, 0.5, (2.0,)), Piece(1.0, 1.5, (1.0,)), Piece(1.5, 3.0, (0.0,))))
    assert [(pc.lo, pc.hi) for pc in v.pieces] == [(0.0, 0.5), (0.5, 1.0), (1.0, 1.5)]
    assert v.support_radius == 1.5


def test_overlapping_pieces_rejected():
    with pytest.raises(ValidationError):
        RadialPotential((Piece(0.0, 1.0, (1.0,)), Piece(0.5, 2.0, (1.0,))))


def test_continuity_under_refinement():
    # linear ramp from 4 to 0, continuous across the support edge
    v = RadialPotential((Piece(0.0, 1.0, (4.0, -4.0)),))
    for r in (0.25, 0.5, 1.0):
        jumps = [abs(evaluate(v, r + h) - evaluate(v, r - h)) for h in (1e-2, 1e-4, 1e-6)]
        assert jumps[0] > jumps[1] > jumps[2]
        assert jumps[2] < 1e-4


def test_maximum_uses_critical_points():
    # 1 + r - r^2 peaks at r = 1/2 with value 5/4
    v = RadialPotential((Piece(0.0, 1.0, (1.0, 1.0, -1.0)),))
    assert maximum(v) == pytest.approx(1.25)


def test_combine_merges_breakpoints(reference_pair):
    merged = combine(reference_pair.v1, reference_pair.v2, 1.0, -0.5)
    assert evaluate(merged, 0.5) == 8.0
    assert evaluate(merged, 1.5) == -0.5
    assert merged.support_radius == 2.0


def test_reference_pair_is_valid(reference_pair):
    report = validate_pair(reference_pair)
    assert report.valid
    # the step at r = 1 is accepted with a warning
    assert any(radius == 1.0 for _, radius in report.warnings)


def test_well_below_r0_is_invalid():
    pair = PotentialPair(square_barrier(4.0, 1.0), square_barrier(1.0, 2.0, start=0.5), 1.0, 2.0)
    report = validate_pair(pair)
    assert not report.valid
    condition, radius = report.failures[0]
    assert condition == "v2 must vanish for r < r0"
    assert 0.5 <= radius < 1.0


def test_v1_vanishing_at_origin_is_invalid():
    v1 = RadialPotential((Piece(0.0, 1.0, (0.0, 1.0)),))
    report = validate_pair(PotentialPair(v1, zero_potential(), 1.0, 2.0))
    assert ("V1(0) must be positive", 0.0) in report.failures


def test_require_valid_raises():
    pair = PotentialPair(square_barrier(4.0, 1.5), zero_potential(), 1.0, 2.0)
    with pytest.raises(ValidationError, match="v1 must vanish"):
        require_valid(pair)


def test_pair_file_round_trip(tmp_path, reference_pair):
    path = tmp_path.joinpath("pair.json")
    dump_pair(reference_pair, path)
    assert load_pair(path) == reference_pair
    assert len(pair_content_hash(path)) == 64


def test_missing_key_is_validation_error(tmp_path):
    path = tmp_path.joinpath("pair.json")
    path.write_text(json.dumps({"v1": {"pieces": []}, "r0": 1}))
    with pytest.raises(ValidationError, match="r1"):
        load_pair(path)
