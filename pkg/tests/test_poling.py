"""Grating Fourier response and fabrication-error Monte Carlo.

The balanced duty cycle is pinned against a brute-force scan of the same
magnitude equation, and the square-wave series is checked for completeness by
reconstructing the profile from partial sums.
"""

import cmath
import math

import numpy as np
import pytest

from coexpm import poling
from coexpm.errors import SolverError, ValidationError
from coexpm.util import spawn_rng


def _coeff_by_hand(duty, order):
    if order == 0:
        return complex(2.0 * duty - 1.0)
    x = math.pi * order * duty
    return 2.0 * duty * (math.sin(x) / x) * cmath.exp(1j * x)


def test_fourier_coefficients_match_hand_formula():
    for duty in (0.25, 0.5, 0.735, 0.9):
        for order in range(5):
            got = poling.fourier_coefficient(duty, order)
            assert got == pytest.approx(_coeff_by_hand(duty, order), abs=1e-14)


def test_dc_term_is_linear_in_duty():
    assert poling.fourier_coefficient(0.5, 0) == 0.0
    assert poling.fourier_coefficient(0.75, 0) == pytest.approx(0.5)
    assert poling.fourier_coefficient(0.9, 0) == pytest.approx(0.8)


def test_negative_order_is_the_conjugate_coefficient():
    for duty in (0.6, 0.735):
        for order in (1, 2, 3):
            c = poling.fourier_coefficient(duty, order)
            assert poling.fourier_coefficient(duty, -order) == pytest.approx(
                c.conjugate(), abs=1e-14
            )


def test_fifty_percent_duty_kills_even_orders():
    for order in (2, 4, 6):
        assert abs(poling.fourier_coefficient(0.5, order)) < 1e-15
    # and leaves the classic 2/pi first-order response
    assert abs(poling.fourier_coefficient(0.5, 1)) == pytest.approx(2.0 / math.pi)


def test_square_wave_partial_sums_converge():
    """L2 error of the reconstructed +1/-1 profile must fall as orders are added."""
    duty = 0.7
    z = np.linspace(0.0, 1.0, 2001, endpoint=False)  # one period, unit length
    profile = np.where(z < duty, 1.0, -1.0)

    def reconstruction(max_order):
        rec = np.full_like(z, poling.fourier_coefficient(duty, 0).real)
        for m in range(1, max_order + 1):
            c = poling.fourier_coefficient(duty, m)
            rec += 2.0 * (c * np.exp(-2j * np.pi * m * z)).real
        return rec

    errs = []
    for m_max in (5, 10, 20, 40, 80):
        rec = reconstruction(m_max)
        errs.append(math.sqrt(np.mean((rec - profile) ** 2)))
    assert all(a > b for a, b in zip(errs, errs[1:]))
    # pointwise convergence away from the domain walls (Gibbs stays local)
    safe = (np.abs(z - duty) > 0.05) & (z > 0.05) & (z < 0.95)
    assert np.max(np.abs(reconstruction(400)[safe] - profile[safe])) < 0.02


def test_balanced_duty_cycle_first_order():
    duty = poling.solve_balanced_duty_cycle(1)
    assert duty == pytest.approx(0.735, abs=0.002)
    r0 = poling.efficiency_ratio(duty, 0)
    r1 = poling.efficiency_ratio(duty, 1)
    assert r0 == pytest.approx(r1, abs=1e-12)
    # brute-force oracle: the sign change of |c0|-|c1| sits within one scan step
    grid = np.linspace(0.5, 1.0 - 1e-9, 200001)
    gap = np.abs(2.0 * grid - 1.0) - np.abs(
        2.0 * grid * np.sinc(grid)  # numpy sinc is sin(pi x)/(pi x)
    )
    flips = np.nonzero(np.diff(np.sign(gap)) != 0)[0]
    assert flips.size == 1
    assert grid[flips[0]] <= duty <= grid[flips[0] + 1]


def test_balanced_duty_shared_ratio_value():
    duty = poling.solve_balanced_duty_cycle(1)
    shared = poling.efficiency_ratio(duty, 0)
    assert shared == pytest.approx(0.2214, abs=1e-3)


def test_no_balanced_duty_for_second_order():
    # |c2(D)| = |sin(2 pi D)|/pi < (2D-1) has no solution in (0.5, 1):
    # the scan finds no sign change and the solver must say so
    grid = np.linspace(0.5 + 1e-6, 1.0 - 1e-6, 1000001)
    gap = np.abs(2.0 * grid - 1.0) - np.abs(np.sin(2.0 * np.pi * grid)) / np.pi
    assert np.all(gap[1:] > 0.0)
    with pytest.raises(SolverError):
        poling.solve_balanced_duty_cycle(2)


def test_balanced_duty_third_order_exists():
    duty = poling.solve_balanced_duty_cycle(3)
    assert 0.5 < duty < 1.0
    assert poling.efficiency_ratio(duty, 0) == pytest.approx(
        poling.efficiency_ratio(duty, 3), abs=1e-12
    )


def test_efficiency_penalty_formula_and_growth():
    for duty in (0.55, 0.7, 0.735258, 0.9):
        assert poling.efficiency_penalty(duty) == pytest.approx(
            1.0 / math.sin(math.pi * duty) ** 2, rel=1e-14
        )
    grid = np.linspace(0.55, 0.95, 9)
    pen = [poling.efficiency_penalty(d) for d in grid]
    # worst at the extremes, best at 50 %: strictly increasing above 0.5
    assert all(a < b for a, b in zip(pen, pen[1:]))


def test_nominal_boundaries_walk_the_duty_cycle():
    bounds = poling.nominal_boundaries_um(2.0, 0.735, 8)
    assert bounds.shape == (8,)
    assert bounds[0] == pytest.approx(0.735 * 2000.0)
    assert bounds[1] == pytest.approx(2000.0)
    assert bounds[4] == pytest.approx(2 * 2000.0 + 0.735 * 2000.0)
    assert bounds[-1] == pytest.approx(4 * 2000.0)  # crystal length for N=8


def test_realized_structure_statistics():
    model = poling.ErrorModel(sigma_z_um=30.0, seed=99)
    st = poling.realize_structure(2.0, 0.735, 64, model)
    err = st.boundary_error_um
    assert err.shape == (64,)
    assert abs(err.mean()) < 1e-9  # mean-subtracted draws
    assert np.std(err) == pytest.approx(30.0, rel=0.35)
    # truncation: raw draws live in +-3 sigma; mean removal can add at most
    # another 3 sigma in pathological cases
    assert np.max(np.abs(err)) <= 6.0 * 30.0
    assert np.all(np.diff(st.boundary_um) > 0)  # walls stay ordered
    assert st.length_mm == pytest.approx(64 * 2.0 / 2.0)


def test_zero_error_structure_is_nominal_and_perfect():
    model = poling.ErrorModel(sigma_z_um=0.0, seed=1)
    st = poling.realize_structure(2.0, 0.735258, 8, model)
    assert np.all(st.boundary_error_um == 0.0)
    eta = poling.conversion_efficiency(st, 2.0 * math.pi / 2000.0)
    assert eta == pytest.approx(1.0, abs=1e-12)


def test_conversion_efficiency_matches_direct_phasor_sum():
    model = poling.ErrorModel(sigma_z_um=40.0, seed=5)
    st = poling.realize_structure(2.0, 0.735, 8, model)
    dk = 2.0 * math.pi / 2000.0
    detune = 3.0e-5
    got = poling.conversion_efficiency(st, dk, detuning_rad_per_um=detune)
    # independent accumulation, one boundary at a time
    acc = 0.0 + 0.0j
    for nominal, delta in zip(st.boundary_nominal_um, st.boundary_error_um):
        acc += cmath.exp(-1j * (dk * delta + detune * nominal))
    want = abs(acc) ** 2 / st.boundary_nominal_um.size**2
    assert got == pytest.approx(want, rel=1e-12)


def test_monte_carlo_zero_sigma_row_is_exact():
    rows = poling.monte_carlo_efficiency(2.0, 0.735258, 8, [0.0], samples=50, seed=3)
    assert rows[0]["mean_eta"] == pytest.approx(1.0, abs=1e-12)
    assert rows[0]["std_eta"] == pytest.approx(0.0, abs=1e-12)


def test_monte_carlo_mean_degrades_with_error():
    rows = poling.monte_carlo_efficiency(
        2.0, 0.735258, 8, [0.0, 25.0, 50.0, 100.0], samples=800, seed=21, reorder="allow"
    )
    means = [r["mean_eta"] for r in rows]
    assert all(a > b for a, b in zip(means, means[1:]))
    assert means[-1] > 0.85  # millimetre-period gratings shrug off 100 um errors


def test_short_period_grating_is_far_more_fragile():
    # same crystal length: 8 domains at 2 mm vs 1066+ domains at 15 um.
    # 10 um errors fully randomize the short-period phasor sum, which then
    # collapses to its random-walk floor near 1/N.
    coarse = poling.monte_carlo_efficiency(
        2.0, 0.735258, 8, [10.0], samples=400, seed=7, reorder="allow"
    )
    fine = poling.monte_carlo_efficiency(
        0.015, 0.735258, 1066, [10.0], samples=400, seed=7, reorder="allow"
    )
    assert fine[0]["mean_eta"] < 0.01 < 0.95 < coarse[0]["mean_eta"]


def test_monte_carlo_reproducible_and_seed_sensitive():
    a = poling.monte_carlo_efficiency(2.0, 0.7, 8, [30.0, 60.0], samples=64, seed=11)
    b = poling.monte_carlo_efficiency(2.0, 0.7, 8, [30.0, 60.0], samples=64, seed=11)
    c = poling.monte_carlo_efficiency(2.0, 0.7, 8, [30.0, 60.0], samples=64, seed=12)
    assert a == b
    assert a != c


def test_efficiency_samples_uses_caller_stream():
    rng1 = spawn_rng(4, 0)
    rng2 = spawn_rng(4, 0)
    s1 = poling.efficiency_samples(2.0, 0.735, 8, 50.0, 32, rng1)
    s2 = poling.efficiency_samples(2.0, 0.735, 8, 50.0, 32, rng2)
    assert np.array_equal(s1, s2)
    assert s1.shape == (32,)
    assert np.all((s1 >= 0.0) & (s1 <= 1.0 + 1e-12))


def test_resample_policy_gives_up_on_hopeless_geometry():
    # 50 um errors on a 15 um period cannot keep walls ordered
    model = poling.ErrorModel(sigma_z_um=50.0, reorder="resample", max_attempts=5, seed=0)
    with pytest.raises(SolverError):
        poling.realize_structure(0.015, 0.7, 32, model)


def test_allow_policy_keeps_the_raw_draw():
    # walls may cross for sigma >> period; the phasor sum stays well defined
    model = poling.ErrorModel(sigma_z_um=50.0, reorder="allow", seed=0)
    st = poling.realize_structure(0.015, 0.7, 32, model)
    assert st.boundary_um.shape == (32,)
    assert np.any(np.diff(st.boundary_um) < 0.0)  # this draw does cross
    eta = poling.conversion_efficiency(st, 2.0 * math.pi / 15.0)
    assert 0.0 <= eta <= 1.0


def test_validation():
    with pytest.raises(ValidationError):
        poling.fourier_coefficient(0.0, 1)  # duty must be inside (0, 1)
    with pytest.raises(ValidationError):
        poling.fourier_coefficient(1.0, 1)
    with pytest.raises(ValidationError):
        poling.ErrorModel(sigma_z_um=-1.0)
    with pytest.raises(ValidationError):
        poling.ErrorModel(sigma_z_um=1.0, reorder="wiggle")
    with pytest.raises(ValidationError):
        poling.realize_structure(2.0, 0.7, 7, poling.ErrorModel(sigma_z_um=0.0))
    with pytest.raises(ValidationError):
        poling.solve_balanced_duty_cycle(0)
