"""Hard-core particle configurations on a periodic ring.

Occupancies are packed 64 sites to a machine word.  The packed words are
what the jit-compiled event loop indexes, so everything here keeps the
word vector as the single source of truth and maintains a cached particle
count beside it.
"""

import numpy as np

__all__ = ["LatticeConfig", "pack_occupancies", "unpack_words"]


def pack_occupancies(occ):
    """Pack a 0/1 array into little-endian 64-bit words (site 0 = bit 0)."""
    occ = np.asarray(occ).astype(np.uint64)
    if occ.ndim != 1:
        raise ValueError("occupancy array must be one dimensional")
    if not np.isin(occ, (0, 1)).all():
        raise ValueError("occupancies must be 0 or 1")
    size = occ.shape[0]
    nwords = (size + 63) >> 6
    words = np.zeros(nwords, dtype=np.uint64)
    idx = np.arange(size)
    np.bitwise_or.at(words, idx >> 6, occ << (idx & 63).astype(np.uint64))
    return words


def unpack_words(words, size):
    """Inverse of pack_occupancies; returns a uint8 array of length size."""
    idx = np.arange(size)
    return ((words[idx >> 6] >> (idx & 63).astype(np.uint64)) & 1).astype(np.uint8)


class LatticeConfig:
    """Occupancy configuration on a ring of `size` sites.

    The only mutating operation is exchange(); everything else reads.
    Site indices are taken modulo the ring size throughout.
    """

    __slots__ = ("size", "words", "count")

    def __init__(self, size, words=None):
        size = int(size)
        if size < 2:
            raise ValueError("ring needs at least two sites")
        self.size = size
        nwords = (size + 63) >> 6
        if words is None:
            self.words = np.zeros(nwords, dtype=np.uint64)
            self.count = 0
        else:
            words = np.asarray(words, dtype=np.uint64).copy()
            if words.shape != (nwords,):
                raise ValueError("word vector has wrong shape for this ring")
            # mask stray bits beyond the last site so popcounts stay honest
            rem = size & 63
            if rem:
                words[-1] &= (np.uint64(1) << np.uint64(rem)) - np.uint64(1)
            self.words = words
            self.count = int(np.bitwise_count(words).sum())

    @classmethod
    def from_array(cls, occ):
        occ = np.asarray(occ)
        cfg = cls(occ.shape[0])
        cfg.words = pack_occupancies(occ)
        cfg.count = int(occ.sum())
        return cfg

    @classmethod
    def from_int(cls, size, pattern):
        """Configuration from an integer bit pattern (site s = bit s)."""
        if pattern < 0 or pattern >> size:
            raise ValueError("pattern does not fit the ring")
        occ = [(pattern >> s) & 1 for s in range(size)]
        return cls.from_array(occ)

    def to_array(self):
        return unpack_words(self.words, self.size)

    def to_int(self):
        return int(sum(int(b) << s for s, b in enumerate(self.to_array())))

    def copy(self):
        out = LatticeConfig.__new__(LatticeConfig)
        out.size = self.size
        out.words = self.words.copy()
        out.count = self.count
        return out

    def occupancy(self, x):
        x %= self.size
        return int((self.words[x >> 6] >> np.uint64(x & 63)) & np.uint64(1))

    def exchange(self, x, y):
        """Swap the occupancies of sites x and y in place.

        Conserves the particle count by construction.  Applying the same
        exchange twice restores the original configuration.
        """
        x %= self.size
        y %= self.size
        if x == y:
            raise ValueError("exchange endpoints must be distinct sites")
        if self.occupancy(x) != self.occupancy(y):
            self.words[x >> 6] ^= np.uint64(1) << np.uint64(x & 63)
            self.words[y >> 6] ^= np.uint64(1) << np.uint64(y & 63)
        return self

    def discrepancy(self, x, y):
        """(eta(y) - eta(x))**2; equals 1 iff an exchange would move a particle."""
        return (self.occupancy(y) - self.occupancy(x)) ** 2

    def to_hex(self):
        """Raw-bit hex string (site 0 = least significant bit)."""
        nbytes = (self.size + 7) >> 3
        return self.words.tobytes()[:nbytes].hex()

    @classmethod
    def from_hex(cls, size, text):
        nbytes = (int(size) + 7) >> 3
        raw = bytes.fromhex(text)
        if len(raw) != nbytes:
            raise ValueError("hex string length does not match ring size")
        nwords = (int(size) + 63) >> 6
        buf = raw + b"\x00" * (nwords * 8 - nbytes)
        return cls(size, words=np.frombuffer(buf, dtype=np.uint64))

    def __eq__(self, other):
        return (
            isinstance(other, LatticeConfig)
            and self.size == other.size
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.size, self.words.tobytes()))

    def __repr__(self):
        return f"LatticeConfig(size={self.size}, count={self.count})"
