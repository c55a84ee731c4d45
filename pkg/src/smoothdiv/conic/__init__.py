from .backends import Backend, ClarabelBackend, RawResult, SolverOptions
from .program import Affine, Program, bmat, kron, partial_trace
from .solve import ConicSolution, solve

__all__ = [
    "Affine",
    "Backend",
    "ClarabelBackend",
    "ConicSolution",
    "Program",
    "RawResult",
    "SolverOptions",
    "bmat",
    "kron",
    "partial_trace",
    "solve",
]
