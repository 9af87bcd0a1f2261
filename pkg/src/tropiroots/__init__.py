"""Polynomial roots and polynomial eigenvalues from tropically scaled companion pencils."""

from .backerr import (BackwardErrorReport, eta_minmax_opt_real, eta_minmax_upper, eta_norm_global,
                      eta_pevp, eta_pevp_max, eta_single, forward_errors)
from .errors import (BothZero, DimensionMismatch, GenerationFailed, InvalidInput, LengthMismatch,
                     NoConvergence, NonRealInput, RankDeficientLeadingBlock, TropirootsError,
                     ZeroPolynomial)
from .linalg import GeneralizedSchur, givens, hess_tri, jacobi_svd_sigma_min, qz_strict
from .pencil import (CompanionPencil, build_block_companion, build_companion, deflate_infinity,
                     deflate_infinity_block, tropical_scale)
from .poly import (MatrixPolynomial, Polynomial, deflate_zero_roots, eval_magnitude_terms, evaluate,
                   random_coeffs, random_from_roots, random_matrix_poly)
from .solver import Assumption1Report, PevpResult, SolveResult, check_assumption1, solve, solve_pevp
from .tropical import GammaWeights, TropicalData, gammas, newton_polygon, tropical_roots
from .xprec import XComplex, expand_from_roots, xadd, xmul

__version__ = "0.1.0"
