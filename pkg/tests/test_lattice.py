"""Bit-packed ring configurations: packing, swaps, round trips."""

import numpy as np
import pytest

from fpmex.lattice import LatticeConfig


def test_round_trip_small():
    occ = [1, 0, 1, 1, 0, 0, 1, 0]
    cfg = LatticeConfig.from_array(occ)
    assert cfg.size == 8
    assert cfg.count == 4
    assert list(cfg.to_array()) == occ


def test_round_trip_across_word_boundary():
    rng = np.random.default_rng(7)
    occ = (rng.random(131) < 0.4).astype(np.uint8)
    cfg = LatticeConfig.from_array(occ)
    assert cfg.count == int(occ.sum())
    assert np.array_equal(cfg.to_array(), occ)
    # integer view agrees with the little-endian bit order
    as_int = cfg.to_int()
    assert as_int == sum(int(b) << i for i, b in enumerate(occ))
    again = LatticeConfig.from_int(131, as_int)
    assert again == cfg


def test_occupancy_indexing():
    cfg = LatticeConfig.from_array([0, 1, 0, 0, 1])
    assert cfg.occupancy(0) == 0
    assert cfg.occupancy(1) == 1
    assert cfg.occupancy(4) == 1


def test_exchange_swaps_in_place():
    cfg = LatticeConfig.from_array([1, 0, 0, 1])
    before = cfg.count
    cfg.exchange(0, 1)
    assert list(cfg.to_array()) == [0, 1, 0, 1]
    assert cfg.count == before
    # swapping equal bits is a no-op on content
    cfg.exchange(1, 3)
    assert list(cfg.to_array()) == [0, 1, 0, 1]


def test_exchange_rejects_same_site():
    cfg = LatticeConfig.from_array([1, 0])
    with pytest.raises(ValueError):
        cfg.exchange(1, 1)


def test_discrepancy():
    cfg = LatticeConfig.from_array([1, 0, 1])
    assert cfg.discrepancy(0, 1) == 1
    assert cfg.discrepancy(0, 2) == 0


def test_hex_round_trip():
    rng = np.random.default_rng(11)
    occ = (rng.random(70) < 0.5).astype(np.uint8)
    cfg = LatticeConfig.from_array(occ)
    blob = cfg.to_hex()
    back = LatticeConfig.from_hex(70, blob)
    assert back == cfg
    assert hash(back) == hash(cfg)


def test_copy_is_independent():
    a = LatticeConfig.from_array([1, 1, 0, 0])
    b = a.copy()
    b.exchange(0, 2)
    assert a != b
    assert list(a.to_array()) == [1, 1, 0, 0]


def test_stray_bits_do_not_leak():
    # occupancies beyond the ring length must never appear
    cfg = LatticeConfig.from_array([1] * 65)
    assert cfg.count == 65
    arr = cfg.to_array()
    assert arr.shape == (65,)
    assert int(arr.sum()) == 65
