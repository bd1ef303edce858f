"""Global polynomial optimization with border-basis moment relaxations."""
from .borderbasis import BorderBasis, check_border_basis, compute_border_basis, normal_form
from .decompose import DecompositionResult, MomentSequence, decompose
from .driver import MaxOrderReached, MinimizationOutcome, MinimizeOptions, SolverFailure, minimize
from .minimizers import MinimizerSet, extract_points, multiplication_matrices
from .polyalg import ConstraintSet, Polynomial, variables
from .problem import ParseError, ProblemFile, format_problem, load_problem, parse_problem
from .relaxation import MomentRelaxation, build_full_relaxation, build_relaxation
from .sdpsolve import SdpProblem, SdpSolution, SolverOptions, Status, solve

__version__ = "0.1.0"

__all__ = [
    "BorderBasis", "check_border_basis", "compute_border_basis", "normal_form",
    "DecompositionResult", "MomentSequence", "decompose",
    "MaxOrderReached", "MinimizationOutcome", "MinimizeOptions", "SolverFailure", "minimize",
    "MinimizerSet", "extract_points", "multiplication_matrices",
    "ConstraintSet", "Polynomial", "variables",
    "ParseError", "ProblemFile", "format_problem", "load_problem", "parse_problem",
    "MomentRelaxation", "build_full_relaxation", "build_relaxation",
    "SdpProblem", "SdpSolution", "SolverOptions", "Status", "solve",
]
