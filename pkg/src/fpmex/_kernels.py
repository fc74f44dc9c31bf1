"""Jit-compiled inner loops: counter-based RNG, event loop, pair sums.

Everything here works on raw arrays (packed occupancy words, folded jump
pmf, alias tables) so the event loop never touches Python objects.  The
RNG is xoshiro256** seeded through splitmix64, which gives every
trajectory its own reproducible stream from a single master seed without
any shared state between workers.

Status codes returned by run_thinning:
  0  completed
  1  event buffer overflow (caller retries with a bigger buffer)
  2  envelope violation: a computed speed factor exceeded 2m + 1,
     which the thinning bound relies on; this is a hard failure.
"""

import numpy as np
from numba import njit

U0 = np.uint64(0)
U1 = np.uint64(1)
U63 = np.uint64(63)

_SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SPLITMIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SPLITMIX_M2 = np.uint64(0x94D049BB133111EB)
_F64_SCALE = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def splitmix64(z):
    """One splitmix64 output for state z (uint64); returns (next_state, value)."""
    z = z + _SPLITMIX_GAMMA
    w = z
    w = (w ^ (w >> np.uint64(30))) * _SPLITMIX_M1
    w = (w ^ (w >> np.uint64(27))) * _SPLITMIX_M2
    w = w ^ (w >> np.uint64(31))
    return z, w


@njit(cache=True)
def seed_stream(seed):
    """Expand one uint64 seed into a xoshiro256** state vector."""
    s = np.empty(4, dtype=np.uint64)
    z = np.uint64(seed)
    for i in range(4):
        z, w = splitmix64(z)
        s[i] = w
    # an all-zero state would be absorbing; splitmix output of any seed
    # is never all zeros across four draws in practice, but guard anyway
    if s[0] == U0 and s[1] == U0 and s[2] == U0 and s[3] == U0:
        s[0] = _SPLITMIX_GAMMA
    return s


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (np.uint64(64) - k))


@njit(cache=True, inline="always")
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), np.uint64(7)) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], np.uint64(45))
    return result


@njit(cache=True, inline="always")
def next_f64(s):
    """Uniform double in [0, 1) with 53 random bits."""
    return (next_u64(s) >> np.uint64(11)) * _F64_SCALE


@njit(cache=True, inline="always")
def next_below(s, n):
    """Uniform integer in [0, n) without modulo bias."""
    bound = np.uint64(n)
    threshold = (U0 - bound) % bound
    while True:
        r = next_u64(s)
        if r >= threshold:
            return np.int64(r % bound)


# -- packed-bit occupancy access ----------------------------------------


@njit(cache=True, inline="always")
def bit_get(words, x):
    return np.int64((words[x >> 6] >> np.uint64(x & 63)) & U1)


@njit(cache=True, inline="always")
def flip_pair(words, x, y):
    words[x >> 6] ^= U1 << np.uint64(x & 63)
    words[y >> 6] ^= U1 << np.uint64(y & 63)


@njit(cache=True)
def directed_count(words, L, m, a, b):
    """One-sided run count for ordered pair (a, b); matches RateModel.directed."""
    if m == 1:
        return np.int64(1)
    total = np.int64(0)
    for k in range(1, m + 1):
        ok = True
        for i in range(1, m - k + 1):
            if bit_get(words, (a - i) % L) == 0:
                ok = False
                break
        if ok:
            for j in range(1, k):
                if bit_get(words, (b + j) % L) == 0:
                    ok = False
                    break
        if ok:
            total += 1
    return total


@njit(cache=True)
def exch_factor(words, L, m, x, y):
    """Symmetric speed factor; matches RateModel.exchange_factor."""
    if m == 1:
        return np.int64(2)
    d = (y - x) % L
    if m >= 3 and (d == 1 or d == L - 1):
        lo = x if d == 1 else y
        return 2 * directed_count(words, L, m, lo, (lo + 1) % L) + 1
    return directed_count(words, L, m, x, y) + directed_count(words, L, m, y, x)


# -- thinning event loop --------------------------------------------------


@njit(cache=True, nogil=True)
def run_thinning(
    words,
    L,
    m,
    t_end,
    snap_times,
    snaps_out,
    thresholds,
    alias,
    seed,
    ev_times,
    ev_x,
    ev_y,
    record,
):
    """Exact-in-law event loop via uniformization with alias proposals.

    Proposals fire at rate L * (2m + 1) / 2 in the process's own clock;
    each picks a uniform source site and an alias-sampled displacement,
    then accepts with probability xi * c / (2 * (2m + 1)), which
    reproduces the per-bond exchange rate p(d) * c / 2 exactly.

    Mutates `words` to the final state, fills `snaps_out` with the state
    at each requested time (times must be sorted, within [0, t_end]),
    and optionally records accepted exchanges.  Returns
    (status, n_events, n_proposals).
    """
    s = seed_stream(seed)
    cap = 2 * m + 1
    rate_env = L * cap / 2.0
    inv_accept = 1.0 / (2.0 * cap)
    n_snaps = snap_times.shape[0]
    max_events = ev_times.shape[0]
    t = 0.0
    si = 0
    n_events = np.int64(0)
    n_props = np.int64(0)
    nwords = words.shape[0]
    while True:
        u = next_f64(s)
        dt = -np.log1p(-u) / rate_env
        t_next = t + dt
        while si < n_snaps and snap_times[si] < t_next:
            for w in range(nwords):
                snaps_out[si, w] = words[w]
            si += 1
        if t_next >= t_end:
            break
        t = t_next
        n_props += 1
        x = next_below(s, L)
        k = next_below(s, L - 1)
        if next_f64(s) < thresholds[k]:
            z = k + 1
        else:
            z = alias[k] + 1
        y = (x + z) % L
        if bit_get(words, x) == bit_get(words, y):
            continue
        c = exch_factor(words, L, m, x, y)
        if c > cap:
            return np.int64(2), n_events, n_props
        if next_f64(s) < c * inv_accept:
            if record:
                if n_events >= max_events:
                    return np.int64(1), n_events, n_props
                ev_times[n_events] = t
                ev_x[n_events] = x
                ev_y[n_events] = y
            flip_pair(words, x, y)
            n_events += 1
    # times at exactly t_end (or trailing duplicates) get the final state
    while si < n_snaps:
        for w in range(nwords):
            snaps_out[si, w] = words[w]
        si += 1
    return np.int64(0), n_events, n_props


# -- closed-form pair sums -------------------------------------------------


@njit(cache=True, nogil=True)
def bilinear_sums(words, L, m, pmf, gvals):
    """Ordered-pair sums driving the drift and the quadratic variation.

    Returns (current, carre) with
      current = sum_{x, d>0} pmf[d] * c * (eta(y) - eta(x)) * (G(x) - G(y))
      carre   = sum_{x, d>0} pmf[d] * c * xi * (G(x) - G(y))**2
    where y = x + d on the ring.  Callers apply the 1/(4n) and 1/(4n^2)
    scalings and the time-speedup factor.
    """
    current = 0.0
    carre = 0.0
    for x in range(L):
        ex = bit_get(words, x)
        gx = gvals[x]
        for d in range(1, L):
            y = x + d
            if y >= L:
                y -= L
            ey = bit_get(words, y)
            if ey == ex:
                continue
            c = exch_factor(words, L, m, x, y)
            if c == 0:
                continue
            w = pmf[d] * c
            gdiff = gx - gvals[y]
            current += w * (ey - ex) * gdiff
            carre += w * gdiff * gdiff
    return current, carre


@njit(cache=True, nogil=True)
def weighted_max_abs_diff(rows, pmf):
    """sum_{x, d>0} pmf[d] * max_s |rows[s, x+d] - rows[s, x]| on the ring."""
    S, L = rows.shape
    total = 0.0
    for x in range(L):
        for d in range(1, L):
            y = x + d
            if y >= L:
                y -= L
            best = 0.0
            for s in range(S):
                v = abs(rows[s, y] - rows[s, x])
                if v > best:
                    best = v
            total += pmf[d] * best
    return total


@njit(cache=True)
def warmup():
    """Touch every jit path once so timing-sensitive callers pay no lag."""
    words = np.zeros(1, dtype=np.uint64)
    words[0] = np.uint64(0b1011)
    L = np.int64(8)
    snap_times = np.array([0.0], dtype=np.float64)
    snaps = np.zeros((1, 1), dtype=np.uint64)
    thresholds = np.full(L - 1, 1.0, dtype=np.float64)
    alias = np.arange(L - 1, dtype=np.int64)
    ev_t = np.zeros(4, dtype=np.float64)
    ev_x = np.zeros(4, dtype=np.int32)
    ev_y = np.zeros(4, dtype=np.int32)
    run_thinning(
        words, L, 2, 0.01, snap_times, snaps, thresholds, alias,
        np.uint64(1), ev_t, ev_x, ev_y, True,
    )
    pmf = np.full(L, 1.0 / (L - 1), dtype=np.float64)
    pmf[0] = 0.0
    g = np.linspace(0.0, 1.0, L)
    bilinear_sums(words, L, 3, pmf, g)
    weighted_max_abs_diff(g.reshape(1, L), pmf)
