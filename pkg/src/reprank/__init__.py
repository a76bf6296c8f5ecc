"""RepRank: reputation scores from combined forward trust and backward mistrust propagation."""

from .graph import (
    Graph,
    GraphParseError,
    Subgraph,
    TransitionMatrix,
    apply,
    build_transition,
    load_edge_list,
    read_edge_file,
    top_k_by_indegree,
    top_k_by_score,
)
from .propagation import (
    SolveResult,
    SolverConfig,
    antitrustrank_solve,
    apply_iteration,
    project_negative,
    project_positive,
    recover_seed,
    reprank_solve,
    seed_vector,
    trustrank_solve,
)

__all__ = [
    "Graph",
    "GraphParseError",
    "SolveResult",
    "SolverConfig",
    "Subgraph",
    "TransitionMatrix",
    "antitrustrank_solve",
    "apply",
    "apply_iteration",
    "build_transition",
    "load_edge_list",
    "project_negative",
    "project_positive",
    "read_edge_file",
    "recover_seed",
    "reprank_solve",
    "seed_vector",
    "top_k_by_indegree",
    "top_k_by_score",
    "trustrank_solve",
]
