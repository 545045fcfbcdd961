"""Numerical verification of square-root bounds for band-truncated gradients.

Library layout:
  domain    - cubes, fields, profiles, weights, corpus, hypothesis checks
  truncate  - band truncation and windowed derivatives
  quad      - midpoint/doubling quadrature and the exact variation oracle
  gamma     - band integrals, axis-reduction bound (compiled/NumPy kernels)
  onedim    - grid decomposition, slope floor, 1-D bound chain, partitions
  nestedlp  - greedy prefix-cap optimum, vertex oracle, refinement limit
  study     - constant ledgers, sweeps, scaling fits, CSV
  cli       - the `varbound` command
"""

from .domain import (ConstantLedger, CubeDomain, Profile, ScalarField,
                     WeightFunction, Window, builtin_corpus, corpus_field,
                     corpus_profile, corpus_weight, ledger_c2, validate_field,
                     validate_profile, validate_weight)
from .gamma import (GammaResult, QuadConfig, axis_reduction_bound, band_sweep,
                    compute_gamma, gamma1, gamma2)
from .kernels import backend_name, compiled_available
from .nestedlp import (NestedLpInstance, NestedLpSolution, greedy_solution,
                       ledger_c3, limit_value, oracle_max, riemann_Y)
from .onedim import (Bound1D, ChainReport, GridDecomposition, KappaPartition,
                     bound_1d, chain_check, check_lemma22, check_slope_floor,
                     decompose, profile_gamma_upper, variation_partition)
from .quad import (MonotoneSegmentation, QuadratureResult,
                   exact_windowed_variation, integrate_cube, integrate_interval,
                   segment_monotone)
from .study import SweepRow, constants_ledger, rows_to_csv, scaling_sweep
from .truncate import gamma2_integrand, truncated_gradient, windowed_derivative

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
