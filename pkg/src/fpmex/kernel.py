"""Symmetric heavy-tailed jump law and its folding onto a ring.

The single-jump distribution on the integers puts mass proportional to
|z|**-(1+gamma) on each nonzero displacement z, with gamma in (0, 2).
Folding onto a ring of L sites sums the line masses over all images
z + j*L; the image sums are Hurwitz zeta values, which scipy evaluates
to full precision.  The folded law is renormalized to total mass one
(the z = 0 images, which a ring cannot use, carry mass L**-(1+gamma)
exactly, and dropping them is the only mass lost).
"""

import numpy as np
from scipy.special import zeta as _hurwitz_zeta

__all__ = [
    "zeta_series",
    "normalizer",
    "JumpKernel",
    "fold_to_ring",
    "build_alias",
]


def zeta_series(s, terms=4096):
    """Riemann zeta by partial sum plus Euler-Maclaurin tail.

    Accurate to well below 1e-12 for s in (1, 3] already at the default
    truncation; kept independent of scipy so the two routes can be
    compared in tests.
    """
    if s <= 1.0:
        raise ValueError("series only converges for s > 1")
    n = np.arange(1, terms + 1, dtype=np.float64)
    head = np.sum(n ** (-s))
    nf = float(terms)
    # Euler-Maclaurin remainder for the sum from terms+1 to infinity
    tail = nf ** (1.0 - s) / (s - 1.0) - 0.5 * nf ** (-s)
    tail += s * nf ** (-s - 1.0) / 12.0
    tail -= s * (s + 1.0) * (s + 2.0) * nf ** (-s - 3.0) / 720.0
    return head + tail


def normalizer(gamma):
    """Normalizing constant of the jump law: 1 / (2 * zeta(1 + gamma))."""
    gamma = float(gamma)
    if not 0.0 < gamma < 2.0:
        raise ValueError("gamma must lie strictly between 0 and 2")
    return 1.0 / (2.0 * zeta_series(1.0 + gamma))


def fold_to_ring(gamma, ring_size):
    """Folded jump probabilities on a ring, index z in [0, ring_size).

    Entry z holds the total line mass of all displacements congruent to z
    (z = 0 excluded and its would-be mass redistributed by a global
    renormalization).  Uses the two-sided Hurwitz zeta identity
    sum_j |z + j*L|**-s = L**-s * (zeta(s, z/L) + zeta(s, 1 - z/L)).
    """
    gamma = float(gamma)
    if not 0.0 < gamma < 2.0:
        raise ValueError("gamma must lie strictly between 0 and 2")
    L = int(ring_size)
    if L < 3:
        raise ValueError("ring too small to fold a jump law onto")
    s = 1.0 + gamma
    z = np.arange(1, L, dtype=np.float64)
    images = L ** (-s) * (_hurwitz_zeta(s, z / L) + _hurwitz_zeta(s, 1.0 - z / L))
    pmf = np.zeros(L, dtype=np.float64)
    pmf[1:] = normalizer(gamma) * images
    # raw folded mass is exactly 1 - L**-(1+gamma); scale it back to 1
    pmf /= 1.0 - L ** (-s)
    return pmf


def build_alias(weights):
    """Walker alias tables for sampling a finite distribution in O(1).

    Returns (threshold, alias): draw slot i uniformly, accept i with
    probability threshold[i], otherwise emit alias[i].
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("need a one dimensional weight vector")
    if (w < 0).any() or w.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive total")
    k = w.size
    scaled = w * (k / w.sum())
    threshold = np.ones(k, dtype=np.float64)
    alias = np.arange(k, dtype=np.int64)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        lo = small.pop()
        hi = large.pop()
        threshold[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] += scaled[lo] - 1.0
        (small if scaled[hi] < 1.0 else large).append(hi)
    # leftovers are 1 up to roundoff
    return threshold, alias


class JumpKernel:
    """Jump law of one gamma folded onto one ring, with sampling tables.

    Attributes
    ----------
    gamma : float
        Tail exponent, in (0, 2).
    c_gamma : float
        Line normalizer 1 / (2 zeta(1 + gamma)).
    ring_size : int
    folded_pmf : ndarray, shape (ring_size,)
        folded_pmf[0] == 0; the rest sums to 1 within roundoff.
    """

    def __init__(self, gamma, ring_size):
        self.gamma = float(gamma)
        self.ring_size = int(ring_size)
        self.c_gamma = normalizer(gamma)
        self.folded_pmf = fold_to_ring(gamma, ring_size)
        self._threshold, self._alias = build_alias(self.folded_pmf[1:])

    def pmf_infinite(self, z):
        """Line pmf at integer displacement(s) z; zero at z = 0."""
        z = np.asarray(z, dtype=np.float64)
        out = np.zeros_like(z)
        nz = z != 0
        out[nz] = self.c_gamma * np.abs(z[nz]) ** (-(1.0 + self.gamma))
        if out.ndim == 0:
            return float(out)
        return out

    def sample_jump(self, rng, count=None):
        """Draw folded displacements in [1, ring_size) via the alias tables."""
        n = 1 if count is None else int(count)
        slot = rng.integers(0, self._threshold.size, size=n)
        keep = rng.random(n) < self._threshold[slot]
        out = np.where(keep, slot, self._alias[slot]) + 1
        if count is None:
            return int(out[0])
        return out

    def __repr__(self):
        return f"JumpKernel(gamma={self.gamma}, ring_size={self.ring_size})"
