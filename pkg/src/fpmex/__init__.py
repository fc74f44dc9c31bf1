"""Simulation and solver laboratory for a long-range exclusion process
with kinetically constrained exchange rates, whose scaling limit is a
fractional porous-medium equation on the torus.

Layers, bottom up:

- lattice, kernel, rates: bit-packed ring configurations, the heavy-tail
  jump law and its periodization, and the occupancy-dependent exchange
  factors with their summation identities.
- dynamics: exact event-thinning simulation plus dense generator tools
  for small rings.
- measures, observables: initial profiles, empirical pairings, and the
  discrete martingale decomposition.
- fracops, pde: fractional Laplacian machinery (pointwise, spectral,
  and discrete-difference forms) and the pseudospectral solver.
- harness, cli: reproducible studies with canonical reports.
"""

__version__ = "0.1.0"

from .dynamics import SimParams, Trajectory, simulate_ring, simulate_scaled
from .fracops import (
    CosineMode,
    GaussianBump,
    HermiteBump,
    TestFunction,
    fractional_laplacian,
    multiplier_ratio,
    operator_gap,
    sobolev_seminorm,
    spectral_seminorm,
    torus_symbol,
)
from .harness import StudyConfig, derive_seed, emit_report, run_study
from .kernel import JumpKernel, fold_to_ring, normalizer
from .lattice import LatticeConfig
from .measures import ProfileSpec, relative_entropy, sample_initial
from .observables import box_average, density_profile, martingale_path, pairing
from .pde import (
    PDESolution,
    exact_linear_solution,
    export_density_csv,
    solve_fpme,
    stable_step,
)
from .rates import RateModel

__all__ = [
    "__version__",
    "LatticeConfig",
    "JumpKernel",
    "fold_to_ring",
    "normalizer",
    "RateModel",
    "SimParams",
    "Trajectory",
    "simulate_ring",
    "simulate_scaled",
    "ProfileSpec",
    "sample_initial",
    "relative_entropy",
    "GaussianBump",
    "HermiteBump",
    "CosineMode",
    "TestFunction",
    "fractional_laplacian",
    "multiplier_ratio",
    "torus_symbol",
    "operator_gap",
    "sobolev_seminorm",
    "spectral_seminorm",
    "PDESolution",
    "solve_fpme",
    "exact_linear_solution",
    "export_density_csv",
    "stable_step",
    "pairing",
    "box_average",
    "density_profile",
    "martingale_path",
    "StudyConfig",
    "run_study",
    "emit_report",
    "derive_seed",
]
