import numpy as np
import pytest

from bose_code.acceptance import smooth_bump
from bose_code.common_utils import NormalizationError, PointwiseViolation, task_rng
from bose_code.partition import (
    TwoParticleState,
    barrier_weighted_integral,
    cell_bookkeeping,
    constant_state_interaction,
    constant_wavefunction,
    localized_energy_split,
    max_weight_at_radius,
    min_weight_at_radius,
    same_cell_fraction,
    smooth_random_wavefunction,
    theorem2_bound_chain,
    verify_convolution_identity,
    weight,
    weight_floor,
)
from bose_code.potential import square_barrier


def random_directions(count, seed=0):
    vectors = task_rng(seed).standard_normal((count, 3))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


@pytest.mark.parametrize(
    "z, value",
    [
        ((0.0, 0.0, 0.0), 1.0),
        ((1.0, 0.0, 0.0), 0.5),
        ((1.0, -1.0, 0.0), 0.25),
        ((2.0, 0.0, 0.0), 0.0),
        ((0.5, 3.0, 0.0), 0.0),
    ],
)
def test_weight_values(z, value):
    assert weight(z, 2.0) == value


def test_weight_rejects_bad_cell():
    with pytest.raises(ValueError):
        weight((0, 0, 0), 0.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_weight_bounds_on_spheres(r):
    cell = 2.0
    values = weight(r * random_directions(5000), cell)
    assert values.min() >= min_weight_at_radius(r, cell) - 1e-12
    assert values.max() <= max_weight_at_radius(r, cell) + 1e-12
    assert values.min() >= weight_floor(r, cell)


def test_extreme_weights_are_attained():
    cell, r = 2.0, 0.8
    diagonal = r * np.ones(3) / np.sqrt(3)
    assert weight(diagonal, cell) == pytest.approx(min_weight_at_radius(r, cell))
    assert weight((r, 0, 0), cell) == pytest.approx(max_weight_at_radius(r, cell))


@pytest.mark.parametrize("r", [0.6, 0.75, 0.9, 0.99])
def test_min_weight_beyond_half_cell(r):
    cell = 1.0
    values = weight(r * random_directions(200000, seed=1), cell)
    assert min_weight_at_radius(r, cell) <= values.min() + 1e-12
    assert min_weight_at_radius(r, cell) >= values.min() - 0.02


def test_min_weight_below_the_diagonal_candidates():
    t = np.array([0.89, 0.134, 0.0])
    r = np.linalg.norm(t)
    assert min_weight_at_radius(r, 1.0) <= weight(t, 1.0) + 1e-12
    assert min_weight_at_radius(r, 1.0) < 0.1
    assert min_weight_at_radius(1.2, 1.0) == 0.0


def test_same_cell_fraction_matches_weight():
    cell, points = 1.5, 256
    rng = task_rng(2)
    x = rng.uniform(0, 10, (200, 3))
    y = x + rng.uniform(-cell, cell, (200, 3))
    deviation = np.abs(same_cell_fraction(x, y, cell, points) - weight(x - y, cell))
    assert deviation.max() <= 3 / points


def test_convolution_identity_report():
    report = verify_convolution_identity(2.0, 500, seed=1)
    assert report.passed
    assert [m for m, _ in report.refinement] == [64, 128, 256]
    assert report.monte_carlo_deviation <= 5 * report.monte_carlo_sigma
    assert report.to_dict()["passed"]


def test_convolution_identity_needs_commensurate_torus():
    with pytest.raises(ValueError):
        verify_convolution_identity(2.0, 10, seed=0, extent=5.0)


def test_energy_split_constant_state():
    left, right = localized_energy_split(constant_wavefunction(8, 4.0), 2.0, smooth_bump())
    assert right > 0
    assert left == pytest.approx(right, rel=1e-10)


def test_energy_split_smooth_state():
    state = smooth_random_wavefunction(6, 3.0, seed=11)
    assert state.norm() == pytest.approx(1.0)
    left, right = localized_energy_split(state, 1.5, smooth_bump(), threads=2)
    assert left == pytest.approx(right, rel=1e-10)


def test_energy_split_requires_normalisation():
    doubled = constant_wavefunction(8, 4.0)
    doubled = TwoParticleState(2 * doubled.values, doubled.extent)
    with pytest.raises(NormalizationError):
        localized_energy_split(doubled, 2.0, smooth_bump())


@pytest.mark.parametrize("cell", [1.7, 4.0])
def test_energy_split_rejects_incommensurate_cells(cell):
    with pytest.raises(ValueError):
        localized_energy_split(constant_wavefunction(8, 4.0), cell, smooth_bump())


def test_barrier_weighted_integral_by_quadrature():
    height, radius, cell = 3.0, 1.0, 2.5
    n = 160
    # midpoint rule on the positive octant
    axis = (np.arange(n) + 0.5) * radius / n
    x, y, z = np.meshgrid(axis, axis, axis, indexing="ij", sparse=True)
    inside = x ** 2 + y ** 2 + z ** 2 < radius ** 2
    integrand = inside * (1 - x / cell) * (1 - y / cell) * (1 - z / cell)
    numeric = 8 * height * np.sum(integrand) * (radius / n) ** 3
    assert barrier_weighted_integral(height, radius, cell) == pytest.approx(numeric, rel=1e-2)


def test_barrier_weighted_integral_needs_radius_below_cell():
    with pytest.raises(ValueError):
        barrier_weighted_integral(1.0, 3.0, 2.0)


def test_constant_state_interaction_matches_closed_form():
    height, radius, cell, extent = 3.0, 1.0, 2.5, 6.0
    energy = constant_state_interaction(square_barrier(height, radius), extent, cell, 72)
    assert energy * extent ** 3 == pytest.approx(
        barrier_weighted_integral(height, radius, cell), rel=5e-2
    )


def test_bound_chain_reference(reference_pair):
    report = theorem2_bound_chain(reference_pair, 0.5, 4.0)
    assert report.admissible
    assert not report.degenerate
    assert report.c1 == pytest.approx((1 - np.sqrt(3) / 2) * 0.5)
    assert report.v1_margin >= 0
    assert report.v2_margin >= 0
    assert report.min_weight_in_range >= report.weight_floor


def test_bound_chain_small_cell_is_flagged(reference_pair):
    report = theorem2_bound_chain(reference_pair, 0.5, 3.0)
    assert not report.admissible
    assert report.degenerate


def test_bound_chain_violation(reference_pair):
    with pytest.raises(PointwiseViolation) as err:
        theorem2_bound_chain(reference_pair, -0.1, 4.0)
    assert 1.0 <= err.value.radius <= 2.0


def test_cell_bookkeeping():
    layout = cell_bookkeeping(10.0, 4.0, 0.5)
    assert layout.full_per_axis == (2, 2, 2)
    assert layout.full_cells == 8
    assert layout.total_cells == 27
    assert layout.cut_cells == 19


def test_cell_bookkeeping_without_shift():
    layout = cell_bookkeeping(8.0, 4.0, 0.0)
    assert layout.full_cells == 8
    assert layout.cut_cells == 0
