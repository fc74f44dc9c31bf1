"""Event-driven simulation and exact small-system machinery.

Two levels of interface:

* simulate_ring works in the process's own clock on a ring of any size;
  criterion-style exactness checks use it directly.
* simulate_scaled wraps it for hydrodynamic runs: a scaling index n gives
  a ring of torus_length * n sites, and all requested times are
  macroscopic, sped up internally by n**gamma.

For rings small enough to enumerate, generator_matrix builds the full
transition-rate matrix, which the stationarity, reversibility, and
event-frequency checks compare against.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .kernel import JumpKernel
from .lattice import LatticeConfig
from .rates import RateModel, exchange_factor_vec, occupancy_matrix

__all__ = [
    "SimParams",
    "Trajectory",
    "simulate_ring",
    "simulate_scaled",
    "generator_matrix",
    "product_weights",
    "stationarity_residual",
    "detailed_balance_residual",
    "dirichlet_form",
    "generator_quadratic",
]

_GENERATOR_SIZE_CAP = 13  # dense (2**13)**2 float64 is already 0.5 GiB


@dataclass(frozen=True)
class SimParams:
    """Macroscopic run description for one trajectory."""

    n: int
    gamma: float
    m: int
    t_end: float
    torus_length: int = 2
    snapshot_times: tuple = ()
    seed: int = 0
    record_events: bool = False

    @property
    def ring_size(self):
        return self.torus_length * self.n

    @property
    def clock_scale(self):
        """Micro time units per macro time unit."""
        return float(self.n) ** self.gamma


@dataclass
class Trajectory:
    """Result of one event-driven run.

    snapshot times are in the clock of whoever launched the run
    (macroscopic for simulate_scaled, native for simulate_ring).
    """

    ring_size: int
    snapshot_times: np.ndarray
    snapshots: np.ndarray  # (n_snaps, nwords) packed occupancies
    final: LatticeConfig
    n_events: int
    n_proposals: int
    event_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    event_pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int32))

    def snapshot_config(self, i):
        return LatticeConfig(self.ring_size, words=self.snapshots[i])

    def snapshot_arrays(self):
        from .lattice import unpack_words

        return np.stack([unpack_words(w, self.ring_size) for w in self.snapshots])


def simulate_ring(
    init,
    kernel,
    rates,
    t_end,
    snapshot_times=(),
    seed=0,
    record_events=False,
    event_capacity=None,
):
    """Run the exclusion process on one ring in its native clock.

    init is a LatticeConfig; kernel.ring_size must match.  Snapshot
    times must be sorted and lie in [0, t_end].  The initial state is
    not implicitly recorded; ask for time 0.0 if you want it.
    """
    if kernel.ring_size != init.size:
        raise ValueError("kernel was folded for a different ring size")
    L = init.size
    m = rates.m
    snap_times = np.asarray(snapshot_times, dtype=np.float64)
    if snap_times.size and (
        (np.diff(snap_times) < 0).any()
        or snap_times[0] < 0
        or snap_times[-1] > t_end
    ):
        raise ValueError("snapshot times must be sorted within [0, t_end]")
    nwords = init.words.shape[0]
    snaps = np.zeros((snap_times.size, nwords), dtype=np.uint64)
    if record_events:
        if event_capacity is None:
            mean_props = L * (2 * m + 1) / 2.0 * t_end
            event_capacity = int(0.6 * mean_props + 10.0 * np.sqrt(mean_props) + 1024)
    else:
        event_capacity = 0

    while True:
        words = init.words.copy()
        ev_t = np.zeros(event_capacity, dtype=np.float64)
        ev_x = np.zeros(event_capacity, dtype=np.int32)
        ev_y = np.zeros(event_capacity, dtype=np.int32)
        status, n_events, n_props = _kernels.run_thinning(
            words,
            np.int64(L),
            np.int64(m),
            float(t_end),
            snap_times,
            snaps,
            kernel._threshold,
            kernel._alias,
            np.uint64(seed),
            ev_t,
            ev_x,
            ev_y,
            bool(record_events),
        )
        if status == 1:
            event_capacity *= 2
            continue
        if status == 2:
            raise RuntimeError(
                "thinning envelope violated: a speed factor exceeded 2m + 1"
            )
        break

    final = LatticeConfig(L, words=words)
    n_events = int(n_events)
    return Trajectory(
        ring_size=L,
        snapshot_times=snap_times,
        snapshots=snaps,
        final=final,
        n_events=n_events,
        n_proposals=int(n_props),
        event_times=ev_t[:n_events].copy(),
        event_pairs=np.stack([ev_x[:n_events], ev_y[:n_events]], axis=1).astype(np.int32)
        if record_events
        else np.empty((0, 2), dtype=np.int32),
    )


def simulate_scaled(params, init, kernel=None, rates=None):
    """Run one macroscopic trajectory; times in params are macroscopic."""
    if kernel is None:
        kernel = JumpKernel(params.gamma, params.ring_size)
    if rates is None:
        rates = RateModel(params.m)
    scale = params.clock_scale
    traj = simulate_ring(
        init,
        kernel,
        rates,
        t_end=params.t_end * scale,
        snapshot_times=tuple(t * scale for t in params.snapshot_times),
        seed=params.seed,
        record_events=params.record_events,
    )
    traj.snapshot_times = np.asarray(params.snapshot_times, dtype=np.float64)
    if traj.event_times.size:
        traj.event_times = traj.event_times / scale
    return traj


# -- exact machinery for enumerable rings ---------------------------------


def generator_matrix(size, kernel, rates):
    """Dense transition-rate matrix over all 2**size configurations.

    Row/column index is the integer bit pattern (site s = bit s).  Entry
    (i, j) for j != i is the jump rate i -> j; rows sum to zero.  The
    per-bond rate is folded_pmf[d] * c / 2, matching what the event loop
    realizes through thinning.
    """
    size = int(size)
    if size > _GENERATOR_SIZE_CAP:
        raise ValueError(f"dense generator capped at {_GENERATOR_SIZE_CAP} sites")
    if kernel.ring_size != size:
        raise ValueError("kernel was folded for a different ring size")
    occ = occupancy_matrix(size)
    nconf = 1 << size
    gen = np.zeros((nconf, nconf), dtype=np.float64)
    pmf = kernel.folded_pmf
    rows = np.arange(nconf)
    for x in range(size):
        for y in range(x + 1, size):
            xi = occ[:, x] != occ[:, y]
            rate = pmf[(y - x) % size] / 2.0 * exchange_factor_vec(occ, rates.m, x, y)
            idx = rows[xi]
            jdx = idx ^ ((1 << x) | (1 << y))
            gen[idx, jdx] += rate[idx]
            gen[idx, idx] -= rate[idx]
    return gen


def product_weights(size, density):
    """Bernoulli product weights over all configurations of the ring."""
    if not 0.0 < density < 1.0:
        raise ValueError("density must be strictly between 0 and 1")
    occ = occupancy_matrix(size)
    k = occ.sum(axis=1)
    return density**k * (1.0 - density) ** (size - k)


def stationarity_residual(gen, weights):
    """max_j |sum_i weights[i] gen[i, j]|; zero iff the measure is invariant."""
    return float(np.max(np.abs(weights @ gen)))


def detailed_balance_residual(gen, weights):
    """max over pairs of |w_i gen_ij - w_j gen_ji|; zero iff reversible."""
    flow = weights[:, None] * gen
    return float(np.max(np.abs(flow - flow.T)))


def dirichlet_form(gen, weights, g):
    """Quadratic form sum_{i,j} w_i gen[i,j] (g_j - g_i)^2.

    Equals the jump-by-jump energy of g under the measure; for a
    reversible measure it satisfies <gen g, g>_w = -D/2 exactly.
    """
    diff2 = np.subtract.outer(g, g) ** 2
    return float(np.einsum("i,ij,ij->", weights, gen, diff2))


def generator_quadratic(gen, weights, g):
    """<gen g, g> in the weighted inner product."""
    return float(weights @ ((gen @ g) * g))
