"""Numerical toolkit for one-dimensional differential operators of
arbitrary order: exponentially normalized solutions, resolvent kernels,
normalized Wronskians, trace and determinant identities."""

from .coeffs import (CoefficientSet, SystemPerturbation, component_l1_tails,
                     cutoff, effective_support, l1_tail, preset, tabulated)
from .errors import (ConfigError, ContractionFailure, DivergentTail,
                     IntegratorFailure, InvalidPreset, NdtraceError,
                     NearSingular, NonIntegerWinding, NoValidAnchor,
                     QuadratureError, SingularSystem, SpectralPointError,
                     UnsupportedCoefficients, ZStepError)
from .fundmat import (FundamentalFrame, TransitionMatrices, WronskianValue,
                      frame, free_frame, free_wronskian, normalized_wronskian,
                      transition_matrices, wronskian_x_factor)
from .jost import (JostSolution, TailSolution, build_solution, choose_anchor,
                   jost_frame_set, kernel_constant, kj_kernel, solve_w, extend)
from .report import VerificationReport
from .resolvent import (DiagonalIntegral, FreeResolventKernel, ResolventKernel,
                        apply_resolvent, build_resolvent,
                        diagonal_difference_integral, matrix_kernel,
                        resint_identity_check, scalar_kernel, z_derivative)
from .roots import RootSystem, compute_roots, i_pow, l0_matrix, projection
from .verify import (Contour, FredholmQuad, delta_fn, det_identity_check,
                     eig_count, fredholm_determinant, large_z_check,
                     locate_zero, trace_check, winding_number)

__version__ = "0.1.0"
