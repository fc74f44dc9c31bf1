"""The kinetic constraint, in pictures.

Exchange rates depend on occupied runs adjacent to the swapping pair:
longer blocked stretches push the factor up to its cap, isolated
particles still move.  The second half prints the run-count identity
that the gradient decomposition rests on, evaluated on random
configurations.

Run:  python3 demos/02_exchange_rates.py
"""

import numpy as np

from fpmex.lattice import LatticeConfig
from fpmex.rates import RateModel

model = RateModel(3)

samples = [
    [0, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 0, 1, 1, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 1, 0, 1, 0, 1, 0],
]
print("order-3 exchange factors for the pair (3, 4):")
for occ in samples:
    cfg = LatticeConfig.from_array(occ)
    c = model.exchange_factor(cfg, 3, 4)
    print(f"  {occ}  ->  c = {c}   (cap {model.max_factor})")
print()

rng = np.random.default_rng(1)
print("decomposition identity on random 12 rings (order 2, distance 3):")
for _ in range(4):
    occ = (rng.random(12) < 0.5).astype(int)
    cfg = LatticeConfig.from_array(occ)
    lhs, rhs = RateModel(2).decomposition_sides(cfg, 2, 5)
    print(f"  {occ.tolist()}  lhs={lhs:+d}  rhs={rhs:+d}")
