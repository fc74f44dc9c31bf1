"""Occupancy-dependent exchange rates with porous-medium kinetics.

The kinetic order m sets how many neighboring particles must cooperate
to move one.  Order 1 is simple exclusion: every exchange runs at the
same speed.  For m >= 2 the speed of an exchange across a pair of sites
is a count of fully occupied runs in a window around the pair, so empty
neighborhoods freeze and dense neighborhoods accelerate.

Conventions used throughout:

* ``directed(cfg, a, b)`` is the one-sided count for the ordered pair
  (a, b): it scans runs that end just left of a and resume just right
  of b.  The symmetric exchange factor adds both orientations.
* For adjacent sites at kinetic order >= 3 the window behind b overlaps
  the window ahead of a, and the orientation-free nearest-neighbor form
  (twice the directed count of the bond read left to right, plus one)
  is the one that leaves the factor invariant under the exchange itself.
  The two forms agree for order 2, and order 1 is the constant 2.

All counts are small nonnegative integers, at most 2m + 1.
"""

import numpy as np

__all__ = [
    "RateModel",
    "occupancy_matrix",
    "directed_vec",
    "exchange_factor_vec",
    "occupied_runs_vec",
    "split_runs_vec",
    "decomposition_gap_vec",
]


class RateModel:
    """Exchange-rate family of one kinetic order m >= 1."""

    def __init__(self, m):
        m = int(m)
        if m < 1:
            raise ValueError("kinetic order must be a positive integer")
        self.m = m
        self.max_factor = 2 * m + 1

    # -- scalar forms on LatticeConfig ---------------------------------

    def directed(self, cfg, a, b):
        """One-sided run count for the ordered pair (a, b).

        Sum over k = 1..m of [run of m-k occupied sites ending at a-1]
        times [run of k-1 occupied sites starting at b+1].  Empty
        products count as 1, so the k = m term alone contributes 1 when
        the whole left run is filled; the total lies in [0, m].
        """
        if self.m == 1:
            return 1
        L = cfg.size
        total = 0
        for k in range(1, self.m + 1):
            prod = 1
            for i in range(1, self.m - k + 1):
                if not cfg.occupancy((a - i) % L):
                    prod = 0
                    break
            if prod:
                for j in range(1, k):
                    if not cfg.occupancy((b + j) % L):
                        prod = 0
                        break
            total += prod
        return total

    def exchange_factor(self, cfg, x, y):
        """Symmetric speed factor for exchanging sites x and y.

        Twice the per-orientation rate; the generator carries the global
        half.  Equals 2 identically at order 1.  Bounded by 2m + 1.
        """
        m = self.m
        if m == 1:
            return 2
        L = cfg.size
        x %= L
        y %= L
        if x == y:
            raise ValueError("rate needs two distinct sites")
        d = (y - x) % L
        if m >= 3 and min(d, L - d) == 1:
            lo = x if d == 1 else y
            return 2 * self.directed(cfg, lo, (lo + 1) % L) + 1
        return self.directed(cfg, x, y) + self.directed(cfg, y, x)

    def window_sites(self, x, y, ring_size):
        """The 4(m-1) sites (mod ring) that the exchange factor reads.

        Order: m-1 sites left of x, m-1 sites right of y, m-1 sites left
        of y, m-1 sites right of x.  Empty at order 1.
        """
        m = self.m
        L = int(ring_size)
        out = []
        out += [(x - i) % L for i in range(m - 1, 0, -1)]
        out += [(y + j) % L for j in range(1, m)]
        out += [(y - i) % L for i in range(m - 1, 0, -1)]
        out += [(x + j) % L for j in range(1, m)]
        return np.asarray(out, dtype=np.int64)

    def occupied_runs(self, cfg, z):
        """Count of fully occupied m-runs ending at z plus starting at z (0..2)."""
        m = self.m
        L = cfg.size
        left = all(cfg.occupancy((z - i) % L) for i in range(m))
        right = all(cfg.occupancy((z + i) % L) for i in range(m))
        return int(left) + int(right)

    def split_runs(self, cfg, z, w):
        """Sum over k = 1..m-1 of [k-run starting at z] * [(m-k)-run ending at w-1]."""
        m = self.m
        L = cfg.size
        total = 0
        for k in range(1, m):
            prod = 1
            for j in range(k):
                if not cfg.occupancy((z + j) % L):
                    prod = 0
                    break
            if prod:
                for i in range(1, m - k + 1):
                    if not cfg.occupancy((w - i) % L):
                        prod = 0
                        break
            total += prod
        return total

    def decomposition_sides(self, cfg, x, y):
        """Both sides of the telescoping identity for the weighted current.

        Left: (directed(x,y) + directed(y,x)) * (eta(y) - eta(x)).
        Right: difference of occupied-run counts at y and x, plus two
        split-run difference pairs.  Integer arithmetic throughout.
        """
        L = cfg.size
        lhs = (self.directed(cfg, x, y) + self.directed(cfg, y, x)) * (
            cfg.occupancy(y) - cfg.occupancy(x)
        )
        rhs = self.occupied_runs(cfg, y) - self.occupied_runs(cfg, x)
        rhs += self.split_runs(cfg, y, x) - self.split_runs(cfg, (y + 1) % L, (x + 1) % L)
        rhs -= self.split_runs(cfg, x, y) - self.split_runs(cfg, (x + 1) % L, (y + 1) % L)
        return lhs, rhs

    def check_decomposition(self, cfg, x, y):
        lhs, rhs = self.decomposition_sides(cfg, x, y)
        return lhs == rhs

    def __repr__(self):
        return f"RateModel(m={self.m})"


# -- vectorized forms over all configurations of a small ring -----------
#
# Rows index integer bit patterns (site s = bit s), columns index sites.
# These power the exhaustive audits, which sweep every configuration of
# rings up to 14 sites, so they avoid per-configuration Python loops.


def occupancy_matrix(size):
    """(2**size, size) 0/1 matrix of all configurations of the ring."""
    if size > 20:
        raise ValueError("exhaustive enumeration capped at 20 sites")
    patterns = np.arange(1 << size, dtype=np.int64)
    return ((patterns[:, None] >> np.arange(size)) & 1).astype(np.int64)


def _runs(occ, sites):
    """Columnwise product of occupancies over the listed sites (all rows)."""
    if len(sites) == 0:
        return np.ones(occ.shape[0], dtype=np.int64)
    size = occ.shape[1]
    cols = np.mod(np.asarray(sites, dtype=np.int64), size)
    return occ[:, cols].prod(axis=1)


def directed_vec(occ, m, a, b):
    """directed(cfg, a, b) for every configuration at once."""
    if m == 1:
        return np.ones(occ.shape[0], dtype=np.int64)
    total = np.zeros(occ.shape[0], dtype=np.int64)
    for k in range(1, m + 1):
        left = _runs(occ, [a - i for i in range(1, m - k + 1)])
        right = _runs(occ, [b + j for j in range(1, k)])
        total += left * right
    return total


def exchange_factor_vec(occ, m, x, y):
    """exchange_factor for every configuration; mirrors the scalar rules."""
    size = occ.shape[1]
    if m == 1:
        return np.full(occ.shape[0], 2, dtype=np.int64)
    d = (y - x) % size
    if m >= 3 and min(d, size - d) == 1:
        lo = x if d == 1 else y
        return 2 * directed_vec(occ, m, lo, lo + 1) + 1
    return directed_vec(occ, m, x, y) + directed_vec(occ, m, y, x)


def occupied_runs_vec(occ, m, z):
    left = _runs(occ, [z - i for i in range(m)])
    right = _runs(occ, [z + i for i in range(m)])
    return left + right


def split_runs_vec(occ, m, z, w):
    total = np.zeros(occ.shape[0], dtype=np.int64)
    for k in range(1, m):
        a = _runs(occ, [z + j for j in range(k)])
        b = _runs(occ, [w - i for i in range(1, m - k + 1)])
        total += a * b
    return total


def decomposition_gap_vec(occ, m, x, y):
    """LHS minus RHS of the telescoping identity, all configurations."""
    size = occ.shape[1]
    lhs = (directed_vec(occ, m, x, y) + directed_vec(occ, m, y, x)) * (
        occ[:, y % size] - occ[:, x % size]
    )
    rhs = occupied_runs_vec(occ, m, y) - occupied_runs_vec(occ, m, x)
    rhs += split_runs_vec(occ, m, y, x) - split_runs_vec(occ, m, y + 1, x + 1)
    rhs -= split_runs_vec(occ, m, x, y) - split_runs_vec(occ, m, x + 1, y + 1)
    return lhs - rhs
