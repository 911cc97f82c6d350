import numpy as np
import pytest
from scipy.optimize import brentq

from bose_code.acceptance import smooth_bump
from bose_code.common_utils import (
    DomainTooSmall,
    GridTooCoarse,
    NoRoot,
    ResourceLimit,
    Unsupported,
)
from bose_code.potential import (
    CompositePotential,
    square_barrier,
    zero_potential,
)
from bose_code.scattering import scattering_length
from bose_code.spectral import (
    averaged_potential,
    box_6d_operator,
    box_neumann_3d_ground,
    kron_sum,
    neumann_ball_ground,
    neumann_box_k_ground,
    neumann_laplacian_1d,
    observed_order,
    offset_rule,
    periodic_laplacian_1d,
    richardson,
    torus_convergence,
    torus_operator,
    two_body_box_ground,
    two_body_torus_ground,
    wavenumber_from_length,
    wavenumber_h,
)


def test_neumann_laplacian_kernel_is_constant():
    lap = neumann_laplacian_1d(10, 0.3)
    assert np.allclose(lap @ np.ones(10), 0)


@pytest.mark.parametrize("n", [5, 8, 13])
def test_neumann_laplacian_spectrum(n):
    step = 0.7
    values = np.linalg.eigvalsh(neumann_laplacian_1d(n, step).toarray())
    expected = 4 / step ** 2 * np.sin(np.pi * np.arange(n) / (2 * n)) ** 2
    assert np.allclose(values, expected)


def test_periodic_laplacian_spectrum():
    n, step = 8, 0.5
    values = np.linalg.eigvalsh(periodic_laplacian_1d(n, step).toarray())
    expected = np.sort(4 / step ** 2 * np.sin(np.pi * np.arange(n) / n) ** 2)
    assert np.allclose(values, expected)


def test_kron_sum_adds_spectra():
    a = neumann_laplacian_1d(3, 1.0)
    b = neumann_laplacian_1d(4, 0.5)
    values = np.linalg.eigvalsh(kron_sum([a, b]).toarray())
    sums = np.add.outer(np.linalg.eigvalsh(a.toarray()), np.linalg.eigvalsh(b.toarray()))
    assert np.allclose(values, np.sort(sums.ravel()))


def test_richardson_removes_quadratic_error():
    steps = [0.4, 0.3, 0.2]
    values = [1.5 + 2 * h ** 2 - 0.5 * h ** 4 for h in steps]
    assert richardson(values[:2], steps[:2]) == pytest.approx(1.5, abs=1e-2)
    assert richardson(values, steps) == pytest.approx(1.5, abs=1e-12)


def test_observed_order_of_quadratic_error():
    steps = [1.0, 0.5, 0.25]
    assert observed_order([3 + h ** 2 for h in steps], steps) == pytest.approx(2.0)


def test_free_neumann_box_spectrum():
    side, n = np.pi, 16
    result = box_neumann_3d_ground(None, side, n, k=2)
    step = side / n
    assert result.eigenvalues[0] == pytest.approx(0, abs=1e-8)
    assert result.eigenvalues[1] == pytest.approx(
        4 / step ** 2 * np.sin(np.pi / (2 * n)) ** 2, rel=1e-6
    )


def test_ball_matches_wavenumber():
    barrier = square_barrier(8.0, 1.0)
    l0 = 25.0
    result = neumann_ball_ground(barrier, l0)
    wave = wavenumber_h(barrier, l0)
    assert result.ground == pytest.approx(wave.h ** 2, rel=1e-3)
    assert result.ground * l0 ** 3 / (3 * scattering_length(barrier)) == pytest.approx(
        1, abs=10 * 1.0 / l0
    )


def test_ball_ground_state_is_positive():
    result = neumann_ball_ground(square_barrier(8.0, 1.0), 10.0, n=1000)
    phi = result.samples[:, 1]
    assert np.all(phi > 0)


def test_free_ball_has_zero_ground():
    result = neumann_ball_ground(zero_potential(), 5.0, n=1000)
    assert result.ground == pytest.approx(0, abs=1e-12)


def test_ball_too_small(reference_pair):
    with pytest.raises(DomainTooSmall):
        neumann_ball_ground(CompositePotential(reference_pair, 0.1), 2.0)


def test_ball_needs_enough_cells():
    with pytest.raises(ValueError):
        neumann_ball_ground(square_barrier(8.0, 1.0), 10.0, n=100)


def test_wavenumber_solves_its_equation():
    a, l0 = 0.5, 20.0
    wave = wavenumber_from_length(a, l0)
    assert np.tan(wave.h * (l0 - a)) == pytest.approx(wave.h * l0, rel=1e-10)
    assert 0 < wave.h < np.pi / (2 * (l0 - a))


def test_wavenumber_expansion_correction_is_first_order():
    a = 0.5
    relative = [
        wavenumber_from_length(a, l0).expansion_deviation / (3 * a / l0 ** 3)
        for l0 in (50.0, 100.0)
    ]
    assert relative[0] == pytest.approx(1.8 * a / 50, rel=0.1)
    assert 1.8 <= relative[0] / relative[1] <= 2.2


def test_wavenumber_no_root():
    with pytest.raises(NoRoot):
        wavenumber_from_length(3.0, 2.0)


def test_wavenumber_degenerate_for_negative_length():
    wave = wavenumber_from_length(-0.2, 10.0)
    assert wave.degenerate
    assert wave.h == 0


def test_small_torus_against_first_order():
    bump = smooth_bump()
    L, n = 3.0, 18
    result = two_body_torus_ground(bump, L, n, extrapolate=False)
    # first order perturbation: the mean of the discrete potential, the Laplacian kills constants
    mean = np.mean(torus_operator(bump, L, n).matrix @ np.ones(n ** 3))
    assert 0 < result.ground <= mean
    assert result.residuals[0] < 1e-4


def test_torus_too_small():
    with pytest.raises(DomainTooSmall):
        two_body_torus_ground(smooth_bump(), 2.0, 20)


def test_torus_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        two_body_torus_ground(smooth_bump(), 3.0, 8)


def test_six_dimensional_box_below_mean_potential():
    bump = smooth_bump()
    side, n = 3.0, 4
    result = two_body_box_ground(bump, side, n)
    mean = np.mean(box_6d_operator(bump, side, n).matrix.matvec(np.ones(n ** 6)))
    assert 0 <= result.ground <= mean + 1e-10


def test_six_dimensional_box_grid_cap():
    with pytest.raises(ResourceLimit):
        two_body_box_ground(smooth_bump(), 3.0, 13)


def test_six_dimensional_box_memory_budget(mocker):
    mocker.patch("bose_code.spectral.MEMORY_BUDGET_MB", 1.0)
    with pytest.raises(ResourceLimit):
        two_body_box_ground(smooth_bump(), 3.0, 8)


def test_box_k_particles():
    assert neumann_box_k_ground(smooth_bump(), 3.0, 1, 4).ground == 0.0
    with pytest.raises(Unsupported):
        neumann_box_k_ground(smooth_bump(), 3.0, 3, 4)


@pytest.mark.parametrize("l0", [5.0, 10.0, 15.0, 25.0, 50.0])
def test_ball_with_a_barrier_on_a_graded_grid(l0):
    result = neumann_ball_ground(square_barrier(8.0, 1.0), l0)
    assert np.isfinite(result.ground)
    assert 0 < result.ground < 3 / l0 ** 2


def test_free_ball_second_eigenvalue():
    l0 = 5.0
    root = brentq(lambda x: np.tan(x) - x, 4.4, 4.6)
    result = neumann_ball_ground(zero_potential(), l0, k=2)
    assert result.eigenvalues[1] == pytest.approx((root / l0) ** 2, rel=1e-4)


def test_free_neumann_gap_converges_at_second_order():
    grids = (8, 16, 32)
    gaps = [box_neumann_3d_ground(None, np.pi, n, k=2).eigenvalues[1] for n in grids]
    steps = [np.pi / n for n in grids]
    assert observed_order(gaps, steps) == pytest.approx(2.0, abs=0.05)
    assert richardson(gaps, steps) == pytest.approx(1.0, abs=1e-4)


def test_free_torus_has_zero_ground():
    result = two_body_torus_ground(zero_potential(), 3.0, 12, extrapolate=False)
    assert result.ground == pytest.approx(0, abs=1e-8)


def test_torus_energy_decreases_with_coupling(reference_pair):
    energies = [
        two_body_torus_ground(CompositePotential(reference_pair, lam), 5.0, 24, extrapolate=False).ground
        for lam in (0.0, 0.1, 0.2)
    ]
    assert energies[0] > energies[1] > energies[2]


def test_cell_average_of_a_constant_is_exact():
    step = 0.3
    axis = np.arange(-4, 5) * step
    values = averaged_potential(square_barrier(2.0, 10.0), axis, step)
    assert np.allclose(values, 2.0)


@pytest.mark.parametrize("tent", [False, True])
def test_offset_rule_weights_sum_to_one(tent):
    offsets, weights = offset_rule(0.4, pieces=3, tent=tent)
    assert weights.sum() == pytest.approx(1.0)
    assert np.all(np.abs(offsets) <= (0.4 if tent else 0.2))
    # the tent is the convolution of two cells: second moment 2 step^2 / 12
    assert np.dot(weights, offsets ** 2) == pytest.approx((2 if tent else 1) * 0.4 ** 2 / 12)


def test_cut_cells_follow_the_barrier_volume():
    # one cell straddling the edge of a unit barrier: the average is the covered fraction
    step = 0.2
    axis = np.array([1.0])
    covered = averaged_potential(square_barrier(1.0, 1.0), axis, step)[0, 0, 0]
    assert 0.4 < covered < 0.6


def test_torus_grids_converge_at_second_order(c5_bump):
    convergence = torus_convergence(c5_bump, 2.5, (20, 30, 45))
    assert 1.8 <= convergence["observed_order"] <= 2.6


def test_six_dimensional_box_extrapolates_by_default():
    bump = smooth_bump()
    result = two_body_box_ground(bump, 3.0, 6)
    assert result.extrapolated is not None
    assert result.best_estimate == result.extrapolated
    assert two_body_box_ground(bump, 3.0, 6, extrapolate=False).extrapolated is None
