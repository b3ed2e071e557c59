"""Primal-dual 2-approximation for the k-minimum spanning tree problem."""

from .assemble import KTreeSolution, assemble_k_tree, pick
from .engine import MINUS_ALL, PLUS_ALL, PDResult, TiePolicy, dual_values, run_pd, run_pd_symbolic
from .graph import Graph, InstanceError, generate, load_instance
from .numeric import LinearForm
from .solver import SolveReport, solve
from .threshold import InfeasibleError, find_critical_tie, find_threshold
from .verify import brute_force_opt, check_solution

__all__ = [
    "Graph", "InstanceError", "InfeasibleError", "KTreeSolution", "LinearForm",
    "MINUS_ALL", "PLUS_ALL", "PDResult", "SolveReport", "TiePolicy",
    "assemble_k_tree", "brute_force_opt", "check_solution", "dual_values",
    "find_critical_tie", "find_threshold", "generate", "load_instance", "pick",
    "run_pd", "run_pd_symbolic", "solve",
]
