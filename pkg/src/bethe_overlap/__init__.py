"""Determinant representations for overlaps of twisted and modified Bethe
vectors of the rational six-vertex (XXX) model, verified at desk scale.

The package keeps two arithmetic modes side by side: exact Gaussian
rationals for identity checking, and arbitrary-precision floats (gmpy2)
for Newton-solved root systems.  Everything downstream of ``scalars`` is
mode-agnostic.

Layering, bottom up: ``scalars`` (field elements, kernels, set products),
``linalg`` (fraction-free and pivoted determinants), ``partitions``
(signed bipartition enumeration), ``mid`` (the z-deformed kernel
determinant in four representations plus summation toolbox), ``chain``
(explicit spin-1/2 realization and the brute-force overlap oracle),
``bethe`` (root systems and solvers), ``overlap`` (the formula pipeline),
``suites``/``cli`` (verification harness).
"""

from .scalars import (ModeMixError, ParamSet, PoleError, Scalar,
                      delta_products, kernel_f, kernel_g, kernel_h,
                      one_like, set_product, zero_like)
from .linalg import SingularMatrixError, det, inverse, mat_mul, mat_vec, solve
from .partitions import Bipartition, enumerate_bipartitions, partition_sum
from .rng import SplitMix64
from .mid import (mid_conjugate, mid_direct, mid_dual, mid_eta_m, mid_eta_n)
from .chain import (DegenerateTwist, SingularAtZero, SpinChainModel,
                    TwistDiag, TwistGeneral, WeightPair, bethe_vector,
                    brute_overlap, build_monodromy, dual_bethe_vector,
                    eigenvalue_diag, eigenvalue_general, hamiltonian_at_zero,
                    modified_bethe_vector, modified_dual_vector, nu_operator,
                    rtt_residual, transfer_diag, transfer_general)
from .bethe import (BetheSystem, JacobianSingular, NoConvergence, RootSet,
                    full_sector_initial, heuristic_initial,
                    modified_onshell_twist, one_magnon_twist, reduced_alpha,
                    residual, solve_newton)
from .overlap import (ConstraintViolated, EigenvalueZeroAtOrigin, NotOnShell,
                      OverlapInput, ReducedSystemViolated, default_eta,
                      overlap_det, overlap_det_reduced, overlap_det_z,
                      overlap_sum_offshell, overlap_sum_onshell,
                      overlap_sum_shifted, rate_prefactor)

__version__ = "0.1.0"
