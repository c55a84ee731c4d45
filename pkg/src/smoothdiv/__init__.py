"""Smoothed quantum divergences: closed forms, semidefinite bounds, expansions."""

from .asymptotics import (ExpansionTerms, f_eps_delta, g_bound, gaussian_cdf, gaussian_quantile,
                          moderate_deviation, second_order)
from .conic.quantities import hypothesis_testing, root_fidelity_sdp, smooth_min_mutual_info
from .divergences import (DivergenceValue, d_max, d_min_f, d_min_projector,
                          mutual_information_and_variance, petz_renyi, relative_entropy,
                          relative_entropy_variance, sandwiched_renyi)
from .errors import DomainError, ParseError, SmoothDivError, SolverFailure
from .operators import (BipartiteLabel, DensityOperator, HermitianOperator, QuantumChannel,
                        apply_channel, fidelity, make_density, matrix_function, partial_trace,
                        random_instance)
from .smoothing import (Bracket, SmoothingResult, bracket_dminf, dminf_upper, seesaw_dminf_lower,
                        smooth_dmax, smooth_hmin)

__version__ = "0.1.0"
