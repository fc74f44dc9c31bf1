"""Event-loop simulation and dense generator tools.

The generator block carries the exact invariance statements (these are
linear-algebra identities on an enumerable state space); the event-loop
block checks conservation laws, determinism, and the event log's
internal consistency.
"""

import numpy as np
import pytest

from fpmex.dynamics import (
    SimParams,
    detailed_balance_residual,
    dirichlet_form,
    generator_matrix,
    generator_quadratic,
    product_weights,
    simulate_ring,
    simulate_scaled,
    stationarity_residual,
)
from fpmex.kernel import JumpKernel
from fpmex.lattice import LatticeConfig
from fpmex.rates import RateModel


@pytest.fixture(scope="module")
def small_setup():
    kernel = JumpKernel(1.0, 16)
    rates = RateModel(2)
    init = LatticeConfig.from_array([1, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1])
    return kernel, rates, init


def test_particle_count_conserved(small_setup):
    kernel, rates, init = small_setup
    traj = simulate_ring(init, kernel, rates, t_end=5.0, snapshot_times=(1.0, 3.0, 5.0), seed=9)
    for i in range(3):
        assert traj.snapshot_config(i).count == init.count
    assert traj.final.count == init.count


def test_same_seed_same_path(small_setup):
    kernel, rates, init = small_setup
    a = simulate_ring(init, kernel, rates, t_end=4.0, seed=123, record_events=True)
    b = simulate_ring(init, kernel, rates, t_end=4.0, seed=123, record_events=True)
    assert a.n_events == b.n_events
    assert a.n_proposals == b.n_proposals
    assert np.array_equal(a.event_times, b.event_times)
    assert np.array_equal(a.event_pairs, b.event_pairs)
    assert a.final == b.final
    c = simulate_ring(init, kernel, rates, t_end=4.0, seed=124, record_events=True)
    assert c.final != a.final or c.n_events != a.n_events


def test_event_log_replays_to_final_state(small_setup):
    kernel, rates, init = small_setup
    traj = simulate_ring(init, kernel, rates, t_end=6.0, seed=5, record_events=True)
    state = init.copy()
    last = 0.0
    for t, (x, y) in zip(traj.event_times, traj.event_pairs):
        assert t > last
        assert t <= 6.0
        # an executed exchange always moves a particle
        assert state.occupancy(int(x)) != state.occupancy(int(y))
        state.exchange(int(x), int(y))
        last = t
    assert state == traj.final


def test_small_event_buffer_is_transparent(small_setup):
    kernel, rates, init = small_setup
    big = simulate_ring(init, kernel, rates, t_end=4.0, seed=321, record_events=True)
    tiny = simulate_ring(
        init, kernel, rates, t_end=4.0, seed=321, record_events=True, event_capacity=4
    )
    assert np.array_equal(big.event_times, tiny.event_times)
    assert big.final == tiny.final


def test_snapshots_bracket_the_state(small_setup):
    kernel, rates, init = small_setup
    traj = simulate_ring(
        init, kernel, rates, t_end=3.0, snapshot_times=(0.0, 3.0), seed=77, record_events=True
    )
    # snapshot at time zero is the initial condition, final snapshot is the end state
    assert traj.snapshot_config(0) == init
    assert traj.snapshot_config(1) == traj.final


def test_scaled_run_is_sped_up_plain_run():
    n = 32
    params = SimParams(
        n=n, gamma=1.0, m=2, t_end=0.25, snapshot_times=(0.1, 0.25), seed=42
    )
    kernel = JumpKernel(1.0, params.ring_size)
    rates = RateModel(2)
    rng = np.random.default_rng(0)
    init = LatticeConfig.from_array((rng.random(params.ring_size) < 0.5).astype(np.uint8))
    scaled = simulate_scaled(params, init)
    micro = simulate_ring(
        init,
        kernel,
        rates,
        t_end=0.25 * params.clock_scale,
        snapshot_times=(0.1 * params.clock_scale, 0.25 * params.clock_scale),
        seed=42,
    )
    assert scaled.final == micro.final
    assert scaled.snapshot_config(0) == micro.snapshot_config(0)
    assert np.allclose(scaled.snapshot_times, (0.1, 0.25))


def test_bad_snapshot_times_rejected(small_setup):
    kernel, rates, init = small_setup
    with pytest.raises(ValueError):
        simulate_ring(init, kernel, rates, t_end=1.0, snapshot_times=(0.5, 0.2), seed=1)
    with pytest.raises(ValueError):
        simulate_ring(init, kernel, rates, t_end=1.0, snapshot_times=(2.0,), seed=1)


# -- dense generator ---------------------------------------------------------


def test_generator_rows_sum_to_zero():
    gen = generator_matrix(6, JumpKernel(0.7, 6), RateModel(2))
    assert np.max(np.abs(gen.sum(axis=1))) < 1e-13
    off = gen - np.diag(np.diag(gen))
    assert off.min() >= 0.0


def test_generator_conserves_particle_number():
    size = 6
    gen = generator_matrix(size, JumpKernel(1.3, size), RateModel(3))
    counts = np.array([bin(s).count("1") for s in range(1 << size)])
    for s in range(1 << size):
        reachable = np.nonzero(gen[s] > 0)[0]
        assert np.all(counts[reachable] == counts[s])


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("density", [0.3, 0.5])
def test_product_measure_invariance(m, density):
    size = 7
    gen = generator_matrix(size, JumpKernel(1.0, size), RateModel(m))
    w = product_weights(size, density)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert stationarity_residual(gen, w) < 1e-12
    assert detailed_balance_residual(gen, w) < 1e-13


def test_energy_identity_random_functions():
    size = 5
    gen = generator_matrix(size, JumpKernel(1.0, size), RateModel(2))
    w = product_weights(size, 0.5)
    rng = np.random.default_rng(17)
    for _ in range(10):
        g = rng.standard_normal(1 << size)
        lhs = generator_quadratic(gen, w, g)
        assert lhs == pytest.approx(-0.5 * dirichlet_form(gen, w, g), abs=1e-10)
        assert lhs <= 1e-12  # the form is negative semidefinite


def test_generator_size_cap():
    with pytest.raises(ValueError):
        generator_matrix(14, JumpKernel(1.0, 14), RateModel(2))
