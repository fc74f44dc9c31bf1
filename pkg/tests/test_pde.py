"""Pseudospectral solver: exactness on the linear equation, step-size
control, conservation, comparison principles, and the weak form.
"""

import numpy as np
import pytest

from fpmex.fracops import GaussianBump, TestFunction, multiplier_ratio
from fpmex.measures import ProfileSpec
from fpmex.pde import (
    PDESolution,
    energy_norms,
    exact_linear_solution,
    export_density_csv,
    range_check,
    solve_fpme,
    stable_step,
    weak_form_residual,
)

BUMP = ProfileSpec(kind="bump", background=0.3, center=1.0, width=0.35, height=0.4)


def test_linear_case_matches_multiplier_exponential():
    t = [0.1, 0.5]
    sol = solve_fpme(BUMP, 1.0, 1, t, grid_size=512)
    ref = exact_linear_solution(BUMP, 1.0, t, 2.0, 512)
    assert np.max(np.abs(sol.values - ref.values)) < 1e-10


def test_exact_solution_is_a_multiplier_flow():
    # one cosine mode decays like exp(-r * omega^gamma * t)
    n, k, gamma = 256, 3, 0.8
    u = np.arange(n) * (2.0 / n)
    init = 0.5 + 0.1 * np.cos(2.0 * np.pi * k * u / 2.0)
    ref = exact_linear_solution(init, gamma, [0.7], 2.0, n)
    omega = 2.0 * np.pi * k / 2.0
    decay = np.exp(-multiplier_ratio(gamma) * omega**gamma * 0.7)
    want = 0.5 + 0.1 * decay * np.cos(2.0 * np.pi * k * u / 2.0)
    assert np.max(np.abs(ref.values[0] - want)) < 1e-13


def test_mass_is_conserved():
    sol = solve_fpme(BUMP, 1.0, 2, np.linspace(0, 0.5, 6), grid_size=256)
    masses = sol.values.mean(axis=1)
    assert np.max(np.abs(masses - masses[0])) < 1e-13


def test_solution_stays_in_unit_interval():
    sol = solve_fpme(BUMP, 1.2, 2, [0.05, 0.3, 0.6], grid_size=256)
    assert range_check(sol.values)
    assert sol.values.min() >= 0.0
    assert sol.values.max() <= 1.0


def test_order_of_accuracy_is_four():
    errs = []
    for dt in (4e-3, 2e-3):
        s = solve_fpme(BUMP, 1.0, 1, [0.5], grid_size=256, dt=dt)
        r = exact_linear_solution(BUMP, 1.0, [0.5], 2.0, 256)
        errs.append(np.max(np.abs(s.values[-1] - r.values[-1])))
    ratio = errs[0] / errs[1]
    assert 11.2 < ratio < 20.8


def test_stable_step_scales_with_grid():
    a = stable_step(1.0, 2, 2.0, 256)
    b = stable_step(1.0, 2, 2.0, 512)
    assert b == pytest.approx(a / 2.0, rel=1e-12)
    c = stable_step(1.5, 2, 2.0, 256)
    assert c < a


def test_unstable_step_triggers_guard():
    with pytest.raises(RuntimeError):
        solve_fpme(BUMP, 1.0, 2, [0.5], grid_size=256, dt=0.02)


def test_decay_toward_the_mean():
    t = np.linspace(0.0, 1.0, 9)
    sol = solve_fpme(BUMP, 1.0, 2, t, grid_size=256)
    spreads = sol.values.max(axis=1) - sol.values.min(axis=1)
    assert np.all(np.diff(spreads) < 0)


def test_higher_order_nonlinearity_spreads_slower_at_low_density():
    # for densities below one, rho^m decreases with m, so the degenerate
    # diffusion relaxes more slowly
    t = [0.4]
    s2 = solve_fpme(BUMP, 1.0, 2, t, grid_size=256)
    s3 = solve_fpme(BUMP, 1.0, 3, t, grid_size=256)
    spread2 = s2.values[0].max() - s2.values[0].min()
    spread3 = s3.values[0].max() - s3.values[0].min()
    assert spread3 > spread2


def test_weak_form_residual_small_and_shrinking():
    g = TestFunction([GaussianBump(1.0, 0.15, 1.0), GaussianBump(1.0, 0.15, 0.5)])
    res = []
    for grid, snaps in ((256, 17), (512, 33)):
        sol = solve_fpme(BUMP, 1.0, 2, np.linspace(0, 0.5, snaps), grid_size=grid)
        res.append(abs(weak_form_residual(sol, g)))
    assert res[0] < 5e-4
    assert res[0] / res[1] > 2.5


def test_weak_form_requires_stored_time():
    sol = solve_fpme(BUMP, 1.0, 2, [0.1, 0.2], grid_size=128)
    g = TestFunction.gaussian(1.0, 0.2)
    with pytest.raises(ValueError):
        weak_form_residual(sol, g, t=0.15)


def test_energy_norms_finite_and_stable():
    t = np.linspace(0, 0.5, 11)
    coarse = energy_norms(solve_fpme(BUMP, 1.0, 2, t, grid_size=256), BUMP.background)
    fine = energy_norms(solve_fpme(BUMP, 1.0, 2, t, grid_size=512), BUMP.background)
    for a, b in zip(coarse, fine):
        assert np.isfinite(a) and np.isfinite(b)
        assert abs(a - b) / abs(b) < 0.02


def test_at_time_lookup():
    sol = solve_fpme(BUMP, 1.0, 2, [0.1, 0.3], grid_size=128)
    assert isinstance(sol, PDESolution)
    assert np.array_equal(sol.at_time(0.3), sol.values[1])
    with pytest.raises(KeyError):
        sol.at_time(0.2)


def test_initial_array_input():
    u = np.arange(128) * (2.0 / 128)
    init = 0.4 + 0.05 * np.sin(np.pi * u)
    sol = solve_fpme(init, 0.9, 2, [0.2], grid_size=128)
    assert sol.values.shape == (1, 128)


def test_density_csv_export_round_trips(tmp_path):
    sol = solve_fpme(BUMP, 1.0, 2, [0.0, 0.25, 0.5], grid_size=64)
    paths = export_density_csv(sol, tmp_path)
    assert len(paths) == 3
    for i, p in enumerate(paths):
        table = np.loadtxt(p, delimiter=",", skiprows=1)
        assert table.shape == (64, 2)
        # repr-formatted floats reload without loss
        assert np.array_equal(table[:, 0], sol.grid)
        assert np.array_equal(table[:, 1], sol.values[i])
        with open(p) as fh:
            assert fh.readline().strip() == "u,rho"
