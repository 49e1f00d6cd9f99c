"""Toeplitz quantization of the harmonic oscillator and its circle reduction.

Exact Bargmann-space bases and Wick matrices, the reduction map to weighted
projective space, spectral-density asymptotics with twisted-sector
corrections, and momentum-polytope lattice points.
"""

from .fock import (EigenspaceBasis, ExactNorm, WeightVector, bargmann_norm_sq, count_dim, enumerate_basis,
                   exact_norm_sq, oscillator_eigenvalue)
from .polytope import MomentumPolytope, TorusAction, bs_lattice_points, fixed_point_values
from .quadrature import QuadratureError
from .reduction import (build_reduction_maps, calibrate, concentration_scan, control_norm_check, integrate_Ik,
                        pres_identity_check, reduced_norm_sq)
from .sectors import (AsymptoticModel, RankDeficiency, RootOfUnity, TwistedSector, enumerate_sectors,
                      fit_subleading, leading_model, model_eval)
from .spectra import density_compare, eigen_residual, hermitian_eigenvalues, jacobi_eigh
from .symbols import PolySymbol, ReducedPoint, SymbolSyntaxError, parse_symbol, parse_test_function, render
from .wick import OperatorMatrix, commutator_norm_scan, lambda_toeplitz, normal_ordered_matrix, toeplitz_matrix

__version__ = "0.1.0"
